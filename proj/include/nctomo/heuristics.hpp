#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nctomo/mle.hpp"
#include "nctomo/report.hpp"
#include "nctomo/simulate.hpp"

namespace nctomo {

/// Directed-tree facts shared by the heuristics.
struct DirectedTree {
  std::vector<std::size_t> order;            // topological
  std::vector<std::uint64_t> up;             // sources at or above each node (bitmask)
  std::vector<std::vector<std::size_t>> receivers_below;  // receiver positions in Down(v)
};

inline DirectedTree analyze_directed_tree(const Configuration& cfg) {
  const Topology& t = cfg.topology;
  if (t.edge_count() + 1 != t.node_count() || !is_connected(t)) throw DomainError("expected a tree topology");
  auto order = topological_order(t);
  if (!order) throw DomainError("expected an acyclic orientation");
  if (cfg.has_overlap()) throw DomainError("tree mode excludes nodes that are both source and receiver");
  if (cfg.sources.size() > 64) throw DomainError("tree mode supports at most 64 sources");
  for (auto s : cfg.sources)
    if (t.in_degree(s) != 0) throw DomainError("source '" + t.node_name(s) + "' has incoming edges");
  for (auto r : cfg.receivers)
    if (t.out_degree(r) != 0) throw DomainError("receiver '" + t.node_name(r) + "' has outgoing edges");
  for (std::size_t v = 0; v < t.node_count(); ++v)
    if (t.is_leaf(v) && !cfg.is_source(v) && !cfg.is_receiver(v))
      throw DomainError("leaf '" + t.node_name(v) + "' is neither source nor receiver");
  DirectedTree dt;
  dt.order = std::move(*order);
  dt.up.assign(t.node_count(), 0);
  for (auto v : dt.order) {
    if (int p = cfg.source_position(v); p >= 0) dt.up[v] |= std::uint64_t{1} << p;
    for (auto e : t.out_edges(v)) dt.up[t.edge(e).head] |= dt.up[v];
  }
  dt.receivers_below.assign(t.node_count(), {});
  for (auto it = dt.order.rbegin(); it != dt.order.rend(); ++it) {
    const std::size_t v = *it;
    for (std::size_t i = 0; i < cfg.receivers.size(); ++i)
      if (cfg.receivers[i] == v) dt.receivers_below[v].push_back(i);
    for (auto e : t.out_edges(v)) {
      const auto& below = dt.receivers_below[t.edge(e).head];
      dt.receivers_below[v].insert(dt.receivers_below[v].end(), below.begin(), below.end());
    }
  }
  return dt;
}

// ---------------------------------------------------------------- subtree decomposition

struct Subtree {
  std::size_t root;                 // a source or a coding point
  std::vector<std::size_t> edges;
  std::vector<std::size_t> leaves;  // receivers and coding points (virtual receivers)
};

struct SubtreePartition {
  std::vector<Subtree> subtrees;
  std::vector<std::size_t> coding_points;
  double p = 0.5;  // probability used for undetermined coding-point receptions
};

/// Splits the tree at coding points: each coding point closes the subtrees that
/// feed it and roots the subtree below it.
inline SubtreePartition subtree_decompose(const Configuration& cfg, double p = 0.5) {
  const Topology& t = cfg.topology;
  analyze_directed_tree(cfg);
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("subtree probability p must lie in [0, 1]");
  SubtreePartition part;
  part.p = p;
  part.coding_points = cfg.coding_points();
  std::vector<std::size_t> roots = cfg.sources;
  roots.insert(roots.end(), part.coding_points.begin(), part.coding_points.end());
  auto is_coding = [&](std::size_t v) { return !cfg.is_source(v) && t.in_degree(v) >= 2; };
  for (auto root : roots) {
    Subtree st{root, {}, {}};
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (auto e : t.out_edges(v)) {
        st.edges.push_back(e);
        const std::size_t w = t.edge(e).head;
        if (is_coding(w) || cfg.is_receiver(w))
          st.leaves.push_back(w);
        else
          stack.push_back(w);
      }
    }
    std::sort(st.edges.begin(), st.edges.end());
    part.subtrees.push_back(std::move(st));
  }
  return part;
}

/// Runs MINC on every subtree. Receptions at coding points are inferred from the
/// receivers below them; undetermined ones are split with weights p and 1-p
/// (the expectation of the coin flip). A coding-rooted subtree whose receivers
/// all saw nothing counts as an all-zero measurement with weight p.
inline EstimateReport subtree_estimate(const Configuration& cfg, const SubtreePartition& part,
                                       const OutcomeHistogram& h) {
  const Topology& t = cfg.topology;
  const DirectedTree dt = analyze_directed_tree(cfg);
  if (h.total <= 0) throw DomainError("empty histogram");
  const ObservationLayout layout(cfg);
  const double p = part.p;
  EstimateReport rep("subtree", t);

  std::vector<std::vector<std::uint64_t>> masks;
  std::vector<double> weights;
  for (const auto& [x, w] : h.counts) {
    masks.push_back(receiver_masks(cfg, layout, x));
    weights.push_back(w);
  }

  for (const auto& st : part.subtrees) {
    RootedTree tree;
    tree.origin[0] = static_cast<std::ptrdiff_t>(st.root);
    std::vector<std::ptrdiff_t> node_of(t.node_count(), -1);
    node_of[st.root] = 0;
    for (std::size_t k = 0; k < tree.size(); ++k) {
      const auto v = static_cast<std::size_t>(tree.origin[k]);
      if (k > 0 && std::find(st.leaves.begin(), st.leaves.end(), v) != st.leaves.end()) continue;
      for (auto e : t.out_edges(v)) {
        const std::size_t w = t.edge(e).head;
        node_of[w] = static_cast<std::ptrdiff_t>(tree.add(static_cast<std::ptrdiff_t>(k), static_cast<std::ptrdiff_t>(e),
                                                          static_cast<std::ptrdiff_t>(w)));
      }
    }
    for (auto leaf : st.leaves) tree.leaves.push_back(static_cast<std::size_t>(node_of[leaf]));
    const std::uint64_t from_root = dt.up[st.root];
    const bool coding_root = !cfg.is_source(st.root);

    BinaryHistogram bh;
    bh.width = st.leaves.size();
    std::vector<std::uint8_t> bits(st.leaves.size());
    std::vector<std::size_t> unknown;
    for (std::size_t o = 0; o < masks.size(); ++o) {
      const auto& mk = masks[o];
      auto below_seen = [&](std::size_t v) {
        std::uint64_t s = 0;
        for (auto i : dt.receivers_below[v]) s |= mk[i];
        return s;
      };
      if (coding_root && below_seen(st.root) == 0) {
        std::fill(bits.begin(), bits.end(), 0);
        bh.add(bits, weights[o] * p);
        continue;
      }
      unknown.clear();
      for (std::size_t i = 0; i < st.leaves.size(); ++i) {
        const std::uint64_t s = below_seen(st.leaves[i]);
        if (cfg.is_receiver(st.leaves[i]) || s != 0) {
          bits[i] = (s & from_root) != 0;
        } else {
          bits[i] = 0;
          unknown.push_back(i);
        }
      }
      if (unknown.size() > 20) throw CapacityError("too many undetermined coding points in one subtree");
      for (std::uint64_t combo = 0; combo < (std::uint64_t{1} << unknown.size()); ++combo) {
        double w = weights[o];
        for (std::size_t u = 0; u < unknown.size(); ++u) {
          const bool rec = (combo >> u) & 1;
          bits[unknown[u]] = rec;
          w *= rec ? p : 1 - p;
        }
        bh.add(bits, w);
      }
    }
    if (bh.total <= 0) {
      for (auto e : st.edges) rep.set(e, std::nan(""), true);
      continue;
    }
    const MincResult res = minc_solve(tree, tree_gammas(tree, bh));
    rep.diagnostics.iterations += res.iterations;
    for (std::size_t k = 1; k < tree.size(); ++k)
      rep.set(static_cast<std::size_t>(tree.link_edge[k]), res.alpha[k], res.degenerate[k]);
  }
  if (rep.flagged()) rep.diagnostics.notes.push_back(std::to_string(rep.flagged()) + " edge(s) clamped or degenerate");
  return rep;
}

// ---------------------------------------------------------------- MINC-like

/// Moment estimator over the whole tree. For edge e = (u, v):
///   gamma_e = P(a receiver below v sees a bit from a source above u) = a_u alpha_e b_v,
/// and per node gamma_v = a_v b_v, where a_v is the probability that some probe
/// reaches v and b_v the probability that what leaves v reaches some receiver.
/// Branching nodes satisfy the MINC equation in a_u, coding nodes the RMINC
/// equation in b_v; sources have a = 1 and receivers b = 1. Tree-model
/// configurations (multicast, reverse multicast and their concatenation) are
/// delegated to the exact MLE.
inline EstimateReport minc_like_estimate(const Configuration& cfg, const OutcomeHistogram& h) {
  bool tree_model = true;
  try {
    analyze_tree_model(cfg);
  } catch (const DomainError&) {
    tree_model = false;
  }
  if (tree_model) {
    EstimateReport rep = mle_tree(cfg, h);
    rep.estimator = "minc-like";
    return rep;
  }

  const Topology& t = cfg.topology;
  const DirectedTree dt = analyze_directed_tree(cfg);
  if (h.total <= 0) throw DomainError("empty histogram");
  const ObservationLayout layout(cfg);
  const std::size_t n = t.node_count(), m = t.edge_count();
  std::vector<double> g_node(n, 0.0), g_edge(m, 0.0);
  std::vector<std::uint64_t> seen(n);
  for (const auto& [x, w] : h.counts) {
    const auto mk = receiver_masks(cfg, layout, x);
    for (auto it = dt.order.rbegin(); it != dt.order.rend(); ++it) {
      const std::size_t v = *it;
      std::uint64_t s = 0;
      for (std::size_t i = 0; i < cfg.receivers.size(); ++i)
        if (cfg.receivers[i] == v) s |= mk[i];
      for (auto e : t.out_edges(v)) s |= seen[t.edge(e).head];
      seen[v] = s;
      if (s & dt.up[v]) g_node[v] += w;
    }
    for (std::size_t e = 0; e < m; ++e)
      if (seen[t.edge(e).head] & dt.up[t.edge(e).tail]) g_edge[e] += w;
  }
  for (auto& g : g_node) g /= h.total;
  for (auto& g : g_edge) g /= h.total;

  const double nan = std::nan("");
  std::vector<double> a(n, nan), b(n, nan);
  std::vector<char> bad(n, 0);
  std::size_t iterations = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (cfg.is_source(v)) a[v] = 1.0;
    if (cfg.is_receiver(v)) b[v] = 1.0;
    if (t.out_degree(v) >= 2) {
      std::vector<double> gc;
      for (auto e : t.out_edges(v)) gc.push_back(g_edge[e]);
      const RootSolve s = solve_minc_equation(g_node[v], gc);
      a[v] = s.A;
      bad[v] |= s.degenerate;
      iterations += s.iterations;
    }
    if (t.in_degree(v) >= 2) {
      std::vector<double> gp;
      for (auto e : t.in_edges(v)) gp.push_back(g_edge[e]);
      const RootSolve s = solve_minc_equation(g_node[v], gp);
      b[v] = s.A;
      bad[v] |= s.degenerate;
      iterations += s.iterations;
    }
    if (std::isnan(a[v]) && !std::isnan(b[v])) a[v] = g_node[v] / b[v];
    if (std::isnan(b[v]) && !std::isnan(a[v])) b[v] = g_node[v] / a[v];
    if (std::isnan(a[v]) || std::isnan(b[v])) bad[v] = 1;  // a relay node: not identifiable
  }
  EstimateReport rep("minc-like", t);
  for (std::size_t e = 0; e < m; ++e) {
    const std::size_t u = t.edge(e).tail, v = t.edge(e).head;
    rep.set(e, g_edge[e] / (a[u] * b[v]), bad[u] || bad[v] || !(g_edge[e] > 0));
    rep.intermediates["gamma:" + t.edge(e).id] = g_edge[e];
  }
  rep.diagnostics.iterations = iterations;
  if (rep.flagged()) rep.diagnostics.notes.push_back(std::to_string(rep.flagged()) + " edge(s) clamped or degenerate");
  return rep;
}

}  // namespace nctomo
