#pragma once

#include <cstddef>
#include <string>

#include "nctomo/maxflow.hpp"
#include "nctomo/topology.hpp"

namespace nctomo {

enum class Clause { none, a, b, c };

inline const char* to_string(Clause c) {
  switch (c) {
    case Clause::a: return "a";
    case Clause::b: return "b";
    case Clause::c: return "c";
    default: return "none";
  }
}

/// How clause (b) ("two edge-disjoint paths") is tested.
enum class DisjointRule {
  /// Two distinct in-edges of C (out-edges of D), other than CD, each fed from S
  /// (each draining to R). Coded nodes combine whatever arrives on distinct edges,
  /// so the two paths may share a prefix.
  coded,
  /// Unit-capacity max-flow >= 2 from distinct sources (to distinct receivers).
  strict,
};

struct IdentifiabilityResult {
  bool identifiable = false;
  Clause condition1 = Clause::none;  // which clause held at the tail C
  Clause condition2 = Clause::none;  // which clause held at the head D
};

namespace detail {

// Max-flow from distinct sources into `target` (or from `target` to distinct
// receivers when `towards_receivers`), unit capacity on every edge except `skip`.
inline long distinct_endpoint_flow(const Configuration& cfg, std::size_t skip, std::size_t target,
                                   bool towards_receivers) {
  const Topology& t = cfg.topology;
  const std::size_t n = t.node_count(), super = n;
  FlowNetwork net(n + 1);
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    if (e == skip) continue;
    const Edge& ed = t.edge(e);
    if (towards_receivers)
      net.add_arc(ed.tail, ed.head, 1);
    else
      net.add_arc(ed.head, ed.tail, 1);  // reversed: flow from target back to sources
  }
  for (auto x : towards_receivers ? cfg.receivers : cfg.sources)
    if (x != target) net.add_arc(x, super, 1);
  return net.max_flow(target, super, 2);
}

}  // namespace detail

/// Conditions 1 and 2 for edge CD of a directed configuration.
inline IdentifiabilityResult check_link_identifiable(const Configuration& cfg, std::size_t edge,
                                                     DisjointRule rule = DisjointRule::coded) {
  const Topology& t = cfg.topology;
  if (edge >= t.edge_count()) throw DomainError("unknown edge index " + std::to_string(edge));
  const std::size_t c = t.edge(edge).tail, d = t.edge(edge).head;

  const auto from_s = reachable(t, cfg.sources, edge);
  const auto to_r = reachable(t, cfg.receivers, edge, std::nullopt, /*backwards=*/true);

  IdentifiabilityResult res;

  // Condition 1 at C.
  if (cfg.is_source(c)) {
    res.condition1 = Clause::a;
  } else {
    bool b = false;
    if (rule == DisjointRule::strict) {
      b = detail::distinct_endpoint_flow(cfg, edge, c, false) >= 2;
    } else {
      const auto feed = reachable(t, cfg.sources, edge, c);
      int fed_edges = 0;
      for (auto e : t.in_edges(c))
        if (e != edge && feed[t.edge(e).tail]) ++fed_edges;
      b = fed_edges >= 2;
    }
    if (b) {
      res.condition1 = Clause::b;
    } else if (from_s[c]) {
      const auto down = reachable(t, {c}, edge);
      for (auto r : cfg.receivers)
        if (r != c && down[r]) {
          res.condition1 = Clause::c;
          break;
        }
    }
  }

  // Condition 2 at D.
  if (cfg.is_receiver(d)) {
    res.condition2 = Clause::a;
  } else {
    bool b = false;
    if (rule == DisjointRule::strict) {
      b = detail::distinct_endpoint_flow(cfg, edge, d, true) >= 2;
    } else {
      const auto drain = reachable(t, cfg.receivers, edge, d, true);
      int drained_edges = 0;
      for (auto e : t.out_edges(d))
        if (e != edge && drain[t.edge(e).head]) ++drained_edges;
      b = drained_edges >= 2;
    }
    if (b) {
      res.condition2 = Clause::b;
    } else if (to_r[d]) {
      const auto up = reachable(t, {d}, edge, std::nullopt, true);
      for (auto s : cfg.sources)
        if (s != d && up[s]) {
          res.condition2 = Clause::c;
          break;
        }
    }
  }

  res.identifiable = res.condition1 != Clause::none && res.condition2 != Clause::none;
  return res;
}

inline IdentifiabilityResult check_link_identifiable(const Configuration& cfg, const std::string& edge_id,
                                                     DisjointRule rule = DisjointRule::coded) {
  return check_link_identifiable(cfg, cfg.topology.edge_index(edge_id), rule);
}

}  // namespace nctomo
