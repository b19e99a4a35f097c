#pragma once

#include <algorithm>
#include <chrono>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nctomo/nctomo.hpp"

namespace nctomo::testing {

using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

// Rooted tree in which every internal node has at least two children, with
// exactly `edges` edges (edges >= 2), as (parent, child) pairs over node ids 0..
inline std::vector<std::pair<std::size_t, std::size_t>> random_branching_tree(Rng& rng, std::size_t edges) {
  std::vector<std::pair<std::size_t, std::size_t>> out{{0, 1}, {0, 2}};
  std::vector<std::size_t> children{2, 0, 0};
  while (out.size() < edges) {
    const std::size_t remaining = edges - out.size();
    std::vector<std::size_t> leaves, internal;
    for (std::size_t v = 0; v < children.size(); ++v) (children[v] ? internal : leaves).push_back(v);
    const bool split = remaining >= 2 && std::bernoulli_distribution(0.6)(rng);
    const std::size_t parent = split ? leaves[uniform_index(rng, leaves.size())] : internal[uniform_index(rng, internal.size())];
    const std::size_t add = split ? 2 : 1;
    for (std::size_t i = 0; i < add; ++i) {
      out.emplace_back(parent, children.size());
      children.push_back(0);
      ++children[parent];
    }
  }
  return out;
}

// Tree-model configuration: an in-tree of sources merging into C, the shared
// link C->D, and an out-tree from D to the receivers. A side with zero edges
// makes C a source (or D a receiver).
inline Configuration random_tree_model(Rng& rng, std::size_t max_edges) {
  const std::size_t budget = max_edges - 1;
  const std::size_t up = std::uniform_int_distribution<std::size_t>(0, budget)(rng);
  std::size_t upper = up == 1 ? 0 : up;
  std::size_t lower = budget - upper;
  if (lower == 1) lower = 0;
  if (lower > 0) lower = std::uniform_int_distribution<std::size_t>(2, lower)(rng);
  Topology t;
  std::vector<std::string> sources, receivers;
  t.add_node("C");
  t.add_node("D");
  int next_edge = 0;
  auto edge_id = [&] { return "e" + std::to_string(next_edge++); };
  if (upper) {
    const auto tr = random_branching_tree(rng, upper);
    std::vector<int> deg(upper + 2, 0);
    for (auto [p, c] : tr) ++deg[p];
    auto name = [](std::size_t v) { return v == 0 ? std::string("C") : "u" + std::to_string(v); };
    for (auto [p, c] : tr) t.add_edge(edge_id(), name(c), name(p));
    for (std::size_t v = 1; v < deg.size(); ++v)
      if (deg[v] == 0 && t.find_node(name(v))) sources.push_back(name(v));
  } else {
    sources.push_back("C");
  }
  t.add_edge(edge_id(), "C", "D");
  if (lower) {
    const auto tr = random_branching_tree(rng, lower);
    std::vector<int> deg(lower + 2, 0);
    for (auto [p, c] : tr) ++deg[p];
    auto name = [](std::size_t v) { return v == 0 ? std::string("D") : "w" + std::to_string(v); };
    for (auto [p, c] : tr) t.add_edge(edge_id(), name(p), name(c));
    for (std::size_t v = 1; v < deg.size(); ++v)
      if (deg[v] == 0 && t.find_node(name(v))) receivers.push_back(name(v));
  } else {
    receivers.push_back("D");
  }
  std::shuffle(sources.begin(), sources.end(), rng);
  std::shuffle(receivers.begin(), receivers.end(), rng);
  return make_configuration(std::move(t), sources, receivers);
}

// Connected undirected graph in which every non-leaf node has degree >= 3:
// a branching tree plus random chords between internal nodes.
inline Topology random_logical_graph(Rng& rng, std::size_t max_nodes) {
  const std::size_t target = std::uniform_int_distribution<std::size_t>(4, max_nodes)(rng);
  Topology t;
  std::vector<std::size_t> deg{0};
  t.add_node("n0");
  std::size_t next_edge = 0;
  auto add = [&](std::size_t a, std::size_t b) {
    t.add_edge("l" + std::to_string(next_edge++), "n" + std::to_string(a), "n" + std::to_string(b));
    ++deg[a];
    ++deg[b];
  };
  // root gets three neighbours, then leaves are expanded into two new leaves each
  for (int i = 0; i < 3; ++i) {
    deg.push_back(0);
    t.add_node("n" + std::to_string(deg.size() - 1));
    add(0, deg.size() - 1);
  }
  while (deg.size() + 2 <= target) {
    std::vector<std::size_t> leaves;
    for (std::size_t v = 0; v < deg.size(); ++v)
      if (deg[v] == 1) leaves.push_back(v);
    const std::size_t v = leaves[uniform_index(rng, leaves.size())];
    for (int i = 0; i < 2; ++i) {
      deg.push_back(0);
      t.add_node("n" + std::to_string(deg.size() - 1));
      add(v, deg.size() - 1);
    }
  }
  std::vector<std::size_t> internal;
  for (std::size_t v = 0; v < deg.size(); ++v)
    if (deg[v] >= 3) internal.push_back(v);
  std::set<std::pair<std::size_t, std::size_t>> present;
  for (const auto& e : t.edges()) present.insert(std::minmax(e.tail, e.head));
  const std::size_t chords = std::uniform_int_distribution<std::size_t>(0, internal.size())(rng);
  for (std::size_t k = 0; k < chords && internal.size() >= 2; ++k) {
    const std::size_t a = internal[uniform_index(rng, internal.size())], b = internal[uniform_index(rng, internal.size())];
    if (a == b || present.count(std::minmax(a, b))) continue;
    present.insert(std::minmax(a, b));
    add(a, b);
  }
  return t;
}

inline std::vector<std::string> random_sources(Rng& rng, const Topology& t, std::size_t max_sources) {
  std::vector<std::string> names = t.node_names();
  std::shuffle(names.begin(), names.end(), rng);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min(max_sources, names.size()))(rng);
  names.resize(k);
  return names;
}

// Edge-id keyed view of an estimate, so that results on differently ordered
// topologies can be compared.
inline std::map<std::string, double> by_edge_id(const EstimateReport& r) {
  std::map<std::string, double> m;
  for (std::size_t e = 0; e < r.size(); ++e) m[r.edge_ids[e]] = r.alpha[e];
  return m;
}

inline LossModel random_model(Rng& rng, std::size_t edges, const std::vector<double>& grid = {0.5, 0.7, 0.9}) {
  LossModel m;
  for (std::size_t e = 0; e < edges; ++e) m.alpha.push_back(grid[uniform_index(rng, grid.size())]);
  return m;
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace nctomo::testing
