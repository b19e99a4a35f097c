#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nctomo/report.hpp"
#include "nctomo/simulate.hpp"
#include "nctomo/topology.hpp"

namespace nctomo {

// ---------------------------------------------------------------- rooted trees

/// A rooted tree used by MINC-style solvers. Node 0 is the root. In a multicast
/// tree the root is the source side; in a reverse multicast tree it is the sink
/// and "children" are the upstream neighbours.
struct RootedTree {
  std::vector<std::ptrdiff_t> parent;            // -1 for the root
  std::vector<std::vector<std::size_t>> children;
  std::vector<std::ptrdiff_t> link_edge;         // original edge of the link into node k, -1 if none
  std::vector<std::ptrdiff_t> origin;            // original node, -1 if virtual
  std::vector<std::size_t> leaves;               // observation column -> tree node

  RootedTree() { add(-1, -1, -1); }

  std::size_t add(std::ptrdiff_t par, std::ptrdiff_t edge, std::ptrdiff_t orig) {
    parent.push_back(par);
    children.emplace_back();
    link_edge.push_back(edge);
    origin.push_back(orig);
    const std::size_t k = parent.size() - 1;
    if (par >= 0) children[static_cast<std::size_t>(par)].push_back(k);
    return k;
  }
  std::size_t size() const noexcept { return parent.size(); }
  bool is_leaf(std::size_t k) const { return children[k].empty(); }
};

/// Binary leaf observations (1 = the leaf saw something), with weights.
struct BinaryHistogram {
  std::size_t width = 0;
  std::map<std::vector<std::uint8_t>, double> counts;
  double total = 0;

  void add(const std::vector<std::uint8_t>& x, double w) {
    if (w == 0) return;
    counts[x] += w;
    total += w;
  }
};

/// gamma_k = P(some leaf below k saw something), for every tree node.
inline std::vector<double> tree_gammas(const RootedTree& tree, const BinaryHistogram& h) {
  std::vector<double> g(tree.size(), 0.0);
  if (h.total <= 0) return g;
  std::vector<std::uint32_t> mark(tree.size(), 0);
  std::uint32_t stamp = 0;
  for (const auto& [x, w] : h.counts) {
    ++stamp;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!x[i]) continue;
      for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(tree.leaves[i]); k >= 0 && mark[k] != stamp;
           k = tree.parent[k]) {
        mark[k] = stamp;
        g[k] += w;
      }
    }
  }
  for (auto& v : g) v /= h.total;
  return g;
}

// ---------------------------------------------------------------- MINC root solve

struct RootSolve {
  double A = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
  bool degenerate = false;
};

/// Solves 1 - gamma_k / A = prod_j (1 - gamma_j / A) for A. With x = 1/A the map
/// (1 - prod_j(1 - gamma_j x)) / x is strictly decreasing on (0, 1/gamma_k], going
/// from sum_j gamma_j down to at most gamma_k, so bisection on x brackets the
/// unique root. Roots with A > 1 (possible with sampled data) are returned as is.
inline RootSolve solve_minc_equation(double gamma_k, const std::vector<double>& gamma_children,
                                     std::size_t max_iterations = 200) {
  RootSolve r;
  double sum = 0, gmax = gamma_k;
  for (double g : gamma_children) {
    sum += g;
    gmax = std::max(gmax, g);
  }
  if (!(gamma_k > 0.0)) {
    r.degenerate = true;
    return r;
  }
  if (gamma_children.size() < 2 || sum <= gamma_k) {
    // Disjoint (or single) child events: the equation only holds as A -> infinity.
    r.A = std::numeric_limits<double>::infinity();
    r.degenerate = true;
    return r;
  }
  auto excess = [&](double x) {
    double prod = 1.0;
    for (double g : gamma_children) prod *= 1.0 - g * x;
    return (1.0 - prod) / x - gamma_k;
  };
  double lo = 0.0, hi = 1.0 / gmax;
  if (excess(hi) > 0.0) {
    r.A = 1.0 / hi;
    r.degenerate = true;
    return r;
  }
  while (r.iterations < max_iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ++r.iterations;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  r.A = 2.0 / (lo + hi);
  return r;
}

struct MincResult {
  std::vector<double> A;      // per tree node; A[0] = 1
  std::vector<double> alpha;  // per tree node: the link from its parent (NaN at the root)
  std::vector<char> degenerate;
  std::size_t iterations = 0;
};

namespace detail {

inline MincResult minc_kernel(const RootedTree& tree, const std::vector<double>& gamma) {
  if (gamma.size() != tree.size()) throw DomainError("gamma vector does not match the tree");
  MincResult r;
  r.A.assign(tree.size(), 1.0);
  r.alpha.assign(tree.size(), std::numeric_limits<double>::quiet_NaN());
  r.degenerate.assign(tree.size(), 0);
  for (std::size_t k = 1; k < tree.size(); ++k) {
    if (tree.is_leaf(k)) {
      r.A[k] = gamma[k];
      r.degenerate[k] = !(gamma[k] > 0.0);
      continue;
    }
    std::vector<double> gc;
    for (auto j : tree.children[k]) gc.push_back(gamma[j]);
    const RootSolve s = solve_minc_equation(gamma[k], gc);
    r.A[k] = s.A;
    r.degenerate[k] = s.degenerate;
    r.iterations += s.iterations;
  }
  for (std::size_t k = 1; k < tree.size(); ++k) {
    const auto p = static_cast<std::size_t>(tree.parent[k]);
    r.alpha[k] = r.A[k] / r.A[p];
    if (r.degenerate[p]) r.degenerate[k] = 1;
  }
  return r;
}

}  // namespace detail

/// MINC on a multicast tree: leaves A_k = gamma_k, interior A_k from the
/// polynomial equation, alpha_k = A_k / A_parent.
inline MincResult minc_solve(const RootedTree& tree, const std::vector<double>& gamma) {
  return detail::minc_kernel(tree, gamma);
}

/// RMINC on a reverse multicast tree (root = sink, children = upstream nodes,
/// leaves = sources). The equations have the same functional form as MINC.
inline MincResult rminc_solve(const RootedTree& reverse_tree, const std::vector<double>& gamma) {
  return detail::minc_kernel(reverse_tree, gamma);
}

// ---------------------------------------------------------------- tree-model structure

/// Sources merge through coding points down to C, edge CD is crossed by every
/// path, and D (or the receivers) branches below it.
struct TreeModel {
  std::size_t c = 0, d = 0, cd = 0;
  std::vector<char> below_d;  // D and its descendants
  std::vector<char> above_c;  // C and its ancestors
};

inline TreeModel analyze_tree_model(const Configuration& cfg) {
  const Topology& t = cfg.topology;
  const std::size_t n = t.node_count(), m = t.edge_count();
  if (m + 1 != n || !is_connected(t)) throw DomainError("tree mode needs a tree topology");
  if (!is_acyclic(t)) throw DomainError("tree mode needs an acyclic orientation");
  if (cfg.has_overlap()) throw DomainError("tree mode excludes nodes that are both source and receiver");
  if (cfg.sources.empty() || cfg.receivers.empty()) throw DomainError("tree mode needs sources and receivers");
  if (cfg.sources.size() > 64) throw DomainError("tree mode supports at most 64 sources");
  for (auto s : cfg.sources)
    if (t.in_degree(s) != 0 || t.out_degree(s) != 1)
      throw DomainError("source '" + t.node_name(s) + "' must be a leaf with one outgoing edge");
  for (auto r : cfg.receivers)
    if (t.out_degree(r) != 0 || t.in_degree(r) != 1)
      throw DomainError("receiver '" + t.node_name(r) + "' must be a leaf with one incoming edge");
  for (std::size_t v = 0; v < n; ++v)
    if (t.is_leaf(v) && !cfg.is_source(v) && !cfg.is_receiver(v))
      throw DomainError("leaf '" + t.node_name(v) + "' is neither source nor receiver");

  const std::size_t M = cfg.sources.size(), N = cfg.receivers.size();
  std::vector<std::size_t> up(m, 0), down(m, 0);
  for (std::size_t e = 0; e < m; ++e) {
    const auto anc = reachable(t, {t.edge(e).tail}, std::nullopt, std::nullopt, true);
    const auto desc = reachable(t, {t.edge(e).head});
    for (auto s : cfg.sources) up[e] += anc[s];
    for (auto r : cfg.receivers) down[e] += desc[r];
  }
  TreeModel tm;
  std::size_t found = 0;
  for (std::size_t e = 0; e < m; ++e) {
    if (up[e] != M && down[e] != N)
      throw DomainError("coding points must lie above all branching points (edge '" + t.edge(e).id + "')");
    if (up[e] == M && down[e] == N) {
      ++found;
      tm.cd = e;
    }
  }
  if (found != 1) throw DomainError("tree-model configuration needs exactly one edge crossed by all paths");
  tm.c = t.edge(tm.cd).tail;
  tm.d = t.edge(tm.cd).head;
  tm.below_d = reachable(t, {tm.d});
  tm.above_c = reachable(t, {tm.c}, std::nullopt, std::nullopt, true);
  return tm;
}

/// Per receiver (config order): bitmask of sources whose coordinate is nonzero
/// on any of its incoming edges.
inline std::vector<std::uint64_t> receiver_masks(const Configuration& cfg, const ObservationLayout& layout,
                                                 const Outcome& x) {
  std::vector<std::uint64_t> masks(cfg.receivers.size(), 0);
  std::size_t slot = 0;
  for (std::size_t i = 0; i < cfg.receivers.size(); ++i)
    for (std::size_t k = 0; k < cfg.topology.in_degree(cfg.receivers[i]); ++k, ++slot)
      for (std::size_t j = 0; j < layout.sources; ++j)
        if (x[slot * layout.sources + j]) masks[i] |= std::uint64_t{1} << j;
  return masks;
}

// ---------------------------------------------------------------- gamma statistics

struct GammaEstimates {
  std::vector<double> multicast;  // per node on D's side (NaN elsewhere)
  std::vector<double> reverse;    // per node on C's side (NaN elsewhere)
  double gamma_cd = 0;            // = multicast[D] = reverse[C] = 1 - p(all zero)
};

inline GammaEstimates estimate_gammas(const Configuration& cfg, const OutcomeHistogram& h) {
  const TreeModel tm = analyze_tree_model(cfg);
  const Topology& t = cfg.topology;
  const std::size_t n = t.node_count();
  if (h.total <= 0) throw DomainError("empty histogram");
  const ObservationLayout layout(cfg);

  // receivers below each D-side node; sources above each C-side node
  std::vector<std::vector<std::size_t>> rec_below(n);
  std::vector<std::uint64_t> src_above(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (tm.below_d[v]) {
      const auto desc = reachable(t, {v});
      for (std::size_t i = 0; i < cfg.receivers.size(); ++i)
        if (desc[cfg.receivers[i]]) rec_below[v].push_back(i);
    }
    if (tm.above_c[v]) {
      const auto anc = reachable(t, {v}, std::nullopt, std::nullopt, true);
      for (std::size_t j = 0; j < cfg.sources.size(); ++j)
        if (anc[cfg.sources[j]]) src_above[v] |= std::uint64_t{1} << j;
    }
  }
  GammaEstimates g;
  g.multicast.assign(n, std::nan(""));
  g.reverse.assign(n, std::nan(""));
  for (std::size_t v = 0; v < n; ++v) {
    if (tm.below_d[v]) g.multicast[v] = 0;
    if (tm.above_c[v]) g.reverse[v] = 0;
  }
  for (const auto& [x, w] : h.counts) {
    if (x.size() != layout.width()) throw DomainError("histogram does not match the configuration's receivers");
    const auto masks = receiver_masks(cfg, layout, x);
    std::uint64_t seen = 0;
    for (auto mk : masks) seen |= mk;
    for (std::size_t v = 0; v < n; ++v) {
      if (tm.below_d[v]) {
        bool any = false;
        for (auto i : rec_below[v]) any = any || masks[i] != 0;
        if (any) g.multicast[v] += w;
      }
      if (tm.above_c[v] && (seen & src_above[v])) g.reverse[v] += w;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    g.multicast[v] /= h.total;
    g.reverse[v] /= h.total;
  }
  g.gamma_cd = g.multicast[tm.d];
  return g;
}

// ---------------------------------------------------------------- reductions

struct ReducedTree {
  RootedTree tree;
  BinaryHistogram histogram;
};

/// Collapses everything above D into one aggregate link (virtual root -> D).
/// Receiver i observes 1 iff its payload is nonzero.
inline ReducedTree reduce_multicast(const Configuration& cfg, const OutcomeHistogram& h) {
  const TreeModel tm = analyze_tree_model(cfg);
  const Topology& t = cfg.topology;
  ReducedTree r;
  std::vector<std::ptrdiff_t> node_of(t.node_count(), -1);
  node_of[tm.d] = static_cast<std::ptrdiff_t>(r.tree.add(0, -1, static_cast<std::ptrdiff_t>(tm.d)));
  for (std::size_t k = 1; k < r.tree.size(); ++k) {
    const auto v = static_cast<std::size_t>(r.tree.origin[k]);
    for (auto e : t.out_edges(v)) {
      const std::size_t w = t.edge(e).head;
      node_of[w] = static_cast<std::ptrdiff_t>(
          r.tree.add(static_cast<std::ptrdiff_t>(k), static_cast<std::ptrdiff_t>(e), static_cast<std::ptrdiff_t>(w)));
    }
  }
  for (auto rcv : cfg.receivers) r.tree.leaves.push_back(static_cast<std::size_t>(node_of[rcv]));
  const ObservationLayout layout(cfg);
  r.histogram.width = cfg.receivers.size();
  for (const auto& [x, w] : h.counts) {
    const auto masks = receiver_masks(cfg, layout, x);
    std::vector<std::uint8_t> bits(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i) bits[i] = masks[i] != 0;
    r.histogram.add(bits, w);
  }
  r.histogram.total = h.total;
  return r;
}

/// Collapses everything below C into one aggregate link (C -> virtual sink).
/// Source j observes 1 iff some receiver saw its bit.
inline ReducedTree reduce_reverse(const Configuration& cfg, const OutcomeHistogram& h) {
  const TreeModel tm = analyze_tree_model(cfg);
  const Topology& t = cfg.topology;
  ReducedTree r;
  std::vector<std::ptrdiff_t> node_of(t.node_count(), -1);
  node_of[tm.c] = static_cast<std::ptrdiff_t>(r.tree.add(0, -1, static_cast<std::ptrdiff_t>(tm.c)));
  for (std::size_t k = 1; k < r.tree.size(); ++k) {
    const auto v = static_cast<std::size_t>(r.tree.origin[k]);
    for (auto e : t.in_edges(v)) {
      const std::size_t u = t.edge(e).tail;
      node_of[u] = static_cast<std::ptrdiff_t>(
          r.tree.add(static_cast<std::ptrdiff_t>(k), static_cast<std::ptrdiff_t>(e), static_cast<std::ptrdiff_t>(u)));
    }
  }
  for (auto s : cfg.sources) r.tree.leaves.push_back(static_cast<std::size_t>(node_of[s]));
  const ObservationLayout layout(cfg);
  r.histogram.width = cfg.sources.size();
  for (const auto& [x, w] : h.counts) {
    std::uint64_t seen = 0;
    for (auto mk : receiver_masks(cfg, layout, x)) seen |= mk;
    std::vector<std::uint8_t> bits(cfg.sources.size());
    for (std::size_t j = 0; j < bits.size(); ++j) bits[j] = (seen >> j) & 1;
    r.histogram.add(bits, w);
  }
  r.histogram.total = h.total;
  return r;
}

/// alpha_CD = A^r_C * A^m_D / gamma, with gamma = gamma^r_C = gamma^m_D.
inline double estimate_alpha_cd(double gamma_cd, double a_r_c, double a_m_d) {
  if (!(gamma_cd > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return a_r_c * a_m_d / gamma_cd;
}

/// Exact MLE for tree-model configurations: MINC below D, RMINC above C, and
/// the CD link from both aggregate path probabilities.
inline EstimateReport mle_tree(const Configuration& cfg, const OutcomeHistogram& h) {
  const TreeModel tm = analyze_tree_model(cfg);
  if (h.total <= 0) throw DomainError("empty histogram");
  EstimateReport rep("mle", cfg.topology);

  const ReducedTree mc = reduce_multicast(cfg, h);
  const auto gm = tree_gammas(mc.tree, mc.histogram);
  const MincResult mres = minc_solve(mc.tree, gm);

  const ReducedTree rv = reduce_reverse(cfg, h);
  const auto gr = tree_gammas(rv.tree, rv.histogram);
  const MincResult rres = rminc_solve(rv.tree, gr);

  auto store = [&](const RootedTree& tree, const MincResult& res) {
    for (std::size_t k = 2; k < tree.size(); ++k)
      rep.set(static_cast<std::size_t>(tree.link_edge[k]), res.alpha[k], res.degenerate[k]);
  };
  store(mc.tree, mres);
  store(rv.tree, rres);

  const double gamma = gm[1];
  // With C a source (D a receiver) the reverse (multicast) side is a single leaf and
  // the formula reduces to A^m_D (A^r_C); use it directly so plain MINC is reproduced bit for bit.
  const double a_cd = cfg.is_source(tm.c)     ? mres.A[1]
                      : cfg.is_receiver(tm.d) ? rres.A[1]
                                              : estimate_alpha_cd(gamma, rres.A[1], mres.A[1]);
  rep.set(tm.cd, a_cd, !(gamma > 0.0) || rres.degenerate[1] || mres.degenerate[1]);

  rep.diagnostics.iterations = mres.iterations + rres.iterations;
  rep.intermediates["gamma_cd"] = gamma;
  rep.intermediates["A_r_C"] = rres.A[1];
  rep.intermediates["A_m_D"] = mres.A[1];
  for (std::size_t k = 1; k < mc.tree.size(); ++k)
    rep.intermediates["gamma_m:" + cfg.topology.node_name(static_cast<std::size_t>(mc.tree.origin[k]))] = gm[k];
  for (std::size_t k = 1; k < rv.tree.size(); ++k)
    rep.intermediates["gamma_r:" + cfg.topology.node_name(static_cast<std::size_t>(rv.tree.origin[k]))] = gr[k];
  if (rep.flagged()) rep.diagnostics.notes.push_back(std::to_string(rep.flagged()) + " edge(s) clamped or degenerate");
  return rep;
}

}  // namespace nctomo
