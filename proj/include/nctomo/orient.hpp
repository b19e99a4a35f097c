#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "nctomo/maxflow.hpp"
#include "nctomo/random.hpp"
#include "nctomo/topology.hpp"

namespace nctomo {

struct OrientationStats {
  std::size_t receivers = 0;
  std::size_t coding_points = 0;
  double links_per_path = 0;  // mean path length in edges
  double paths_per_link = 0;  // mean over edges of |P(e)|
  double path_count = 0;
  long edge_disjoint_paths = 0;  // max-flow merged sources -> merged receivers
};

struct OrientResult {
  Configuration config;
  OrientationStats stats;
};

/// Receiver, coding-point, path-length and path-count statistics. Path counts come from dynamic programming, so
/// they stay cheap even when explicit enumeration would not.
inline OrientationStats orientation_stats(const Configuration& cfg) {
  const Topology& t = cfg.topology;
  const auto order = topological_order(t);
  if (!order) throw DomainError("cycle detected in configuration");
  const std::size_t n = t.node_count();

  // from[v]: number of source->v walks not passing through another source;
  // to[v]: number of v->receiver walks whose interior avoids sources.
  std::vector<double> from(n, 0.0), to(n, 0.0);
  for (auto v : *order) {
    const double outflow = cfg.is_source(v) ? 1.0 : from[v];
    for (auto e : t.out_edges(v)) from[t.edge(e).head] += outflow;
  }
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    const std::size_t v = *it;
    double paths_on = 0;
    for (auto e : t.out_edges(v)) paths_on += to[t.edge(e).head];
    // ending here plus continuing (sources never forward foreign probes)
    to[v] = (cfg.is_receiver(v) ? 1.0 : 0.0) + (cfg.is_source(v) ? 0.0 : paths_on);
  }
  OrientationStats st;
  st.receivers = cfg.receivers.size();
  st.coding_points = cfg.coding_points().size();
  double total_len = 0;
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const std::size_t u = t.edge(e).tail, v = t.edge(e).head;
    const double through = (cfg.is_source(u) ? 1.0 : from[u]) * to[v];
    total_len += through;
  }
  for (auto s : cfg.sources) {
    double starting = 0;
    for (auto e : t.out_edges(s)) starting += to[t.edge(e).head];
    st.path_count += starting;
  }
  st.links_per_path = st.path_count > 0 ? total_len / st.path_count : 0.0;
  st.paths_per_link = t.edge_count() ? total_len / static_cast<double>(t.edge_count()) : 0.0;

  // Sources are split so flow cannot pass through them.
  const std::size_t super_s = 2 * n, super_r = 2 * n + 1;
  FlowNetwork net(2 * n + 2);
  const long inf = static_cast<long>(t.edge_count()) + 1;
  auto out_node = [&](std::size_t v) { return cfg.is_source(v) ? n + v : v; };
  for (const auto& e : t.edges()) net.add_arc(out_node(e.tail), e.head, 1);
  for (auto s : cfg.sources) net.add_arc(super_s, n + s, inf);
  for (auto r : cfg.receivers) net.add_arc(r, super_r, inf);
  st.edge_disjoint_paths = net.max_flow(super_s, super_r);
  return st;
}

/// Orientation of an undirected logical graph given the sources: visits nodes
/// outward from S, orienting every unset edge of the visited node outward.
/// Candidates are ranked by fewest unset edges, then hop distance from S, then
/// a seeded pseudo-random pick.
inline OrientResult orient(const Topology& g, const std::vector<std::string>& source_names, std::uint64_t seed) {
  if (source_names.empty()) throw DomainError("orient needs at least one source");
  std::vector<std::size_t> sources;
  for (const auto& s : source_names) {
    auto v = g.find_node(s);
    if (!v) throw DomainError("source '" + s + "' is not a graph node");
    if (std::find(sources.begin(), sources.end(), *v) != sources.end())
      throw DomainError("duplicate source '" + s + "'");
    sources.push_back(*v);
  }
  if (!is_connected(g)) throw DomainError("graph is disconnected");

  const std::size_t n = g.node_count(), m = g.edge_count();
  // dir: 0 unset, 1 stored direction, 2 reversed
  std::vector<int> dir(m, 0);
  std::vector<std::size_t> unset(n);
  for (std::size_t v = 0; v < n; ++v) unset[v] = g.degree(v);
  auto set_out = [&](std::size_t e, std::size_t from) {
    dir[e] = g.edge(e).tail == from ? 1 : 2;
    --unset[g.edge(e).tail];
    --unset[g.edge(e).head];
  };

  std::vector<std::size_t> dist(n, std::numeric_limits<std::size_t>::max());
  {
    std::queue<std::size_t> q;
    for (auto s : sources) {
      dist[s] = 0;
      q.push(s);
    }
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (auto e : g.incident(v)) {
        const std::size_t w = g.opposite(e, v);
        if (dist[w] == std::numeric_limits<std::size_t>::max()) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
      }
    }
  }

  std::vector<char> in_v1(n, 0), in_r(n, 0);
  for (auto s : sources) {
    for (auto e : g.incident(s))
      if (!dir[e]) set_out(e, s);
    in_v1[s] = 1;
  }
  auto head_of = [&](std::size_t e) { return dir[e] == 1 ? g.edge(e).head : g.edge(e).tail; };
  for (auto s : sources)
    for (auto e : g.incident(s))
      if (head_of(e) == s) in_r[s] = 1;

  auto frontier = [&] {
    std::set<std::size_t> v2;
    for (std::size_t v = 0; v < n; ++v)
      if (in_v1[v])
        for (auto e : g.incident(v)) {
          const std::size_t w = g.opposite(e, v);
          if (!in_v1[w]) v2.insert(w);
        }
    return v2;
  };

  std::uint64_t step = 0;
  for (auto v2 = frontier(); !v2.empty(); v2 = frontier()) {
    std::vector<std::size_t> cand;
    for (auto v : v2) {
      if (unset[v] == 0)
        in_r[v] = 1;
      else
        cand.push_back(v);
    }
    if (cand.empty()) break;
    std::size_t best_unset = std::numeric_limits<std::size_t>::max(), best_dist = best_unset;
    for (auto v : cand) best_unset = std::min(best_unset, unset[v]);
    std::vector<std::size_t> u1;
    for (auto v : cand)
      if (unset[v] == best_unset) u1.push_back(v);
    for (auto v : u1) best_dist = std::min(best_dist, dist[v]);
    std::vector<std::size_t> u2;
    for (auto v : u1)
      if (dist[v] == best_dist) u2.push_back(v);
    const std::size_t pick = u2.size() == 1 ? u2[0] : u2[counter_hash(seed, step) % u2.size()];
    ++step;
    for (auto e : g.incident(pick))
      if (!dir[e] && !in_v1[g.opposite(e, pick)]) set_out(e, pick);
    in_v1[pick] = 1;
  }

  Topology t;
  for (const auto& name : g.node_names()) t.add_node(name);
  for (std::size_t e = 0; e < m; ++e) {
    const Edge& ed = g.edge(e);
    if (!dir[e]) throw DomainError("edge '" + ed.id + "' left unoriented");
    if (dir[e] == 1)
      t.add_edge(ed.id, g.node_name(ed.tail), g.node_name(ed.head));
    else
      t.add_edge(ed.id, g.node_name(ed.head), g.node_name(ed.tail));
  }
  std::vector<std::string> receivers;
  for (std::size_t v = 0; v < n; ++v)
    if (in_r[v]) receivers.push_back(g.node_name(v));

  OrientResult res{make_configuration(std::move(t), source_names, receivers), {}};
  res.stats = orientation_stats(res.config);
  return res;
}

}  // namespace nctomo
