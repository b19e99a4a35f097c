#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nctomo/orient.hpp"
#include "nctomo/topology.hpp"

namespace nctomo {

/// A named reference topology, stored with the orientation induced by its
/// default sources (treat the edges as undirected to re-orient for others).
struct BuiltinTopology {
  std::string name;
  Topology topology;
  std::vector<std::string> sources;
  std::vector<std::string> receivers;

  Configuration configuration() const { return make_configuration(topology, sources, receivers); }
};

/// Five links: sources A, B code at C, C-D is shared, D branches to E, F.
inline BuiltinTopology builtin_tree5() {
  BuiltinTopology b{"tree5", {}, {"A", "B"}, {"E", "F"}};
  for (const char* n : {"A", "B", "C", "D", "E", "F"}) b.topology.add_node(n);
  b.topology.add_edge("AC", "A", "C");
  b.topology.add_edge("BC", "B", "C");
  b.topology.add_edge("CD", "C", "D");
  b.topology.add_edge("DE", "D", "E");
  b.topology.add_edge("DF", "D", "F");
  return b;
}

/// Nine links, sources 1 and 2, one coding point (4), receivers 7-10.
inline BuiltinTopology builtin_tree9() {
  BuiltinTopology b{"tree9", {}, {"1", "2"}, {"7", "8", "9", "10"}};
  for (int v = 1; v <= 10; ++v) b.topology.add_node(std::to_string(v));
  const char* edges[][3] = {{"1", "4", "8"}, {"2", "3", "7"}, {"3", "1", "3"}, {"4", "2", "5"}, {"5", "6", "10"},
                            {"6", "6", "9"}, {"7", "3", "4"}, {"8", "5", "4"}, {"9", "5", "6"}};
  for (auto& e : edges) b.topology.add_edge(e[0], e[1], e[2]);
  return b;
}

/// 45 links: centre C joined to A, B, D; each of those fans out twice more
/// (C1..C6, D1..D12) down to 24 leaves F1..F24. Edge ids 1-24 are leaf links,
/// 25-36 the next level, 37-42 the level below A/B/D, 43-45 = C-A, C-B, C-D.
/// Edges are listed parent -> child from the centre.
inline Topology tree45_undirected() {
  Topology t;
  for (const char* n : {"C", "A", "B", "D"}) t.add_node(n);
  for (int i = 1; i <= 6; ++i) t.add_node("C" + std::to_string(i));
  for (int i = 1; i <= 12; ++i) t.add_node("D" + std::to_string(i));
  for (int i = 1; i <= 24; ++i) t.add_node("F" + std::to_string(i));
  for (int j = 1; j <= 24; ++j) t.add_edge(std::to_string(j), "D" + std::to_string((j + 1) / 2), "F" + std::to_string(j));
  for (int j = 1; j <= 12; ++j)
    t.add_edge(std::to_string(24 + j), "C" + std::to_string((j + 1) / 2), "D" + std::to_string(j));
  const char* parent[] = {"B", "B", "A", "A", "D", "D"};
  for (int i = 1; i <= 6; ++i) t.add_edge(std::to_string(36 + i), parent[i - 1], "C" + std::to_string(i));
  t.add_edge("43", "C", "A");
  t.add_edge("44", "C", "B");
  t.add_edge("45", "C", "D");
  return t;
}

inline std::vector<std::string> builtin_names() { return {"tree5", "tree9", "tree45"}; }

/// tree45 oriented for sources F15 and F18, whose paths meet (and are coded) at C.
inline BuiltinTopology builtin_tree45() {
  const auto o = orient(tree45_undirected(), {"F15", "F18"}, 0);
  return {"tree45", o.config.topology, o.config.source_names(), o.config.receiver_names()};
}

inline std::optional<BuiltinTopology> builtin(const std::string& name) {
  if (name == "tree5") return builtin_tree5();
  if (name == "tree9") return builtin_tree9();
  if (name == "tree45") return builtin_tree45();
  return std::nullopt;
}

}  // namespace nctomo
