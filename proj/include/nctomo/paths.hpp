#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <tuple>
#include <vector>

#include "nctomo/topology.hpp"

namespace nctomo {

struct Path {
  std::size_t source;
  std::size_t receiver;
  std::vector<std::size_t> edges;  // edge indices, source first
  std::size_t last_edge() const { return edges.back(); }
};

/// Paths sharing (source, receiver, receiver in-edge).
struct Triplet {
  std::size_t source;
  std::size_t receiver;
  std::size_t in_edge;
  std::vector<std::size_t> paths;  // indices into PathSet::paths
};

struct PathSet {
  std::vector<Path> paths;
  std::vector<Triplet> triplets;
  std::vector<std::vector<std::size_t>> by_edge;  // edge -> crossing paths

  /// Largest number of paths in one triplet.
  std::size_t max_per_triplet() const {
    std::size_t m = 0;
    for (const auto& t : triplets) m = std::max(m, t.paths.size());
    return m;
  }
};

/// All source-to-receiver directed paths. Sources do not forward, so a path never
/// passes through a source; it may pass through receivers that have out-edges.
/// Paths are sorted lexicographically by edge-index sequence.
inline PathSet enumerate_paths(const Configuration& cfg, std::size_t cap = 1'000'000) {
  const Topology& t = cfg.topology;
  if (!is_acyclic(t)) throw DomainError("cycle detected while enumerating paths");
  PathSet ps;
  std::vector<std::size_t> stack;
  auto dfs = [&](auto&& self, std::size_t src, std::size_t v) -> void {
    if (!stack.empty() && cfg.is_receiver(v)) {
      if (ps.paths.size() >= cap) throw CapacityError("path enumeration exceeds cap of " + std::to_string(cap));
      ps.paths.push_back({src, v, stack});
    }
    if (!stack.empty() && cfg.is_source(v)) return;
    for (auto e : t.out_edges(v)) {
      stack.push_back(e);
      self(self, src, t.edge(e).head);
      stack.pop_back();
    }
  };
  for (auto s : cfg.sources) dfs(dfs, s, s);
  std::sort(ps.paths.begin(), ps.paths.end(), [](const Path& a, const Path& b) { return a.edges < b.edges; });

  std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> slot;
  std::vector<std::size_t> rpos(t.node_count());
  for (std::size_t i = 0; i < cfg.receivers.size(); ++i) rpos[cfg.receivers[i]] = i;
  for (std::size_t i = 0; i < ps.paths.size(); ++i) {
    const Path& p = ps.paths[i];
    slot.emplace(std::make_tuple(cfg.source_position(p.source), rpos[p.receiver], p.last_edge()), 0);
  }
  for (auto& [key, idx] : slot) {
    idx = ps.triplets.size();
    ps.triplets.push_back({cfg.sources[static_cast<std::size_t>(std::get<0>(key))], cfg.receivers[std::get<1>(key)],
                           std::get<2>(key), {}});
  }
  ps.by_edge.assign(t.edge_count(), {});
  for (std::size_t i = 0; i < ps.paths.size(); ++i) {
    const Path& p = ps.paths[i];
    ps.triplets[slot.at(std::make_tuple(cfg.source_position(p.source), rpos[p.receiver], p.last_edge()))]
        .paths.push_back(i);
    for (auto e : p.edges) ps.by_edge[e].push_back(i);
  }
  return ps;
}

/// Alphabet lower bound: the largest number of paths sharing a triplet. A field
/// with q >= this value is required for path identifiability.
inline std::size_t min_alphabet_bound(const PathSet& ps) { return ps.max_per_triplet(); }

}  // namespace nctomo
