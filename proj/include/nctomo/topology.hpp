#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "nctomo/error.hpp"

namespace nctomo {

struct Edge {
  std::string id;
  std::size_t tail;
  std::size_t head;
};

/// Directed multigraph with named nodes and uniquely named edges.
/// Undirected graphs use the same type; edge direction is then just storage order.
class Topology {
 public:
  std::size_t add_node(const std::string& name) {
    if (name.empty()) throw DomainError("empty node id");
    if (auto it = node_index_.find(name); it != node_index_.end()) return it->second;
    node_index_.emplace(name, nodes_.size());
    nodes_.push_back(name);
    in_.emplace_back();
    out_.emplace_back();
    return nodes_.size() - 1;
  }

  std::size_t add_edge(const std::string& id, const std::string& tail, const std::string& head) {
    if (id.empty()) throw DomainError("empty edge id");
    if (tail == head) throw DomainError("self-loop on node '" + tail + "' (edge '" + id + "')");
    if (edge_index_.count(id)) throw DomainError("duplicate edge id '" + id + "'");
    const std::size_t u = add_node(tail), v = add_node(head);
    edge_index_.emplace(id, edges_.size());
    edges_.push_back({id, u, v});
    out_[u].push_back(edges_.size() - 1);
    in_[v].push_back(edges_.size() - 1);
    return edges_.size() - 1;
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::string& node_name(std::size_t v) const { return nodes_.at(v); }
  const std::vector<std::string>& node_names() const noexcept { return nodes_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::optional<std::size_t> find_node(const std::string& name) const {
    auto it = node_index_.find(name);
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> find_edge(const std::string& id) const {
    auto it = edge_index_.find(id);
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t node_index(const std::string& name) const {
    if (auto v = find_node(name)) return *v;
    throw DomainError("unknown node '" + name + "'");
  }
  std::size_t edge_index(const std::string& id) const {
    if (auto e = find_edge(id)) return *e;
    throw DomainError("unknown edge '" + id + "'");
  }

  const std::vector<std::size_t>& in_edges(std::size_t v) const { return in_.at(v); }
  const std::vector<std::size_t>& out_edges(std::size_t v) const { return out_.at(v); }
  std::size_t in_degree(std::size_t v) const { return in_.at(v).size(); }
  std::size_t out_degree(std::size_t v) const { return out_.at(v).size(); }
  std::size_t degree(std::size_t v) const { return in_degree(v) + out_degree(v); }
  bool is_leaf(std::size_t v) const { return degree(v) == 1; }

  /// The other endpoint of edge e seen from node v.
  std::size_t opposite(std::size_t e, std::size_t v) const {
    const Edge& ed = edges_.at(e);
    return ed.tail == v ? ed.head : ed.tail;
  }

  /// All edges incident to v (in-edges then out-edges).
  std::vector<std::size_t> incident(std::size_t v) const {
    std::vector<std::size_t> r = in_.at(v);
    r.insert(r.end(), out_.at(v).begin(), out_.at(v).end());
    return r;
  }

  /// Same nodes (same order) and edge ids, every edge reversed.
  Topology reversed() const {
    Topology t;
    for (const auto& n : nodes_) t.add_node(n);
    for (const auto& e : edges_) t.add_edge(e.id, nodes_[e.head], nodes_[e.tail]);
    return t;
  }

  friend bool operator==(const Topology& a, const Topology& b) {
    if (a.nodes_ != b.nodes_ || a.edges_.size() != b.edges_.size()) return false;
    for (std::size_t i = 0; i < a.edges_.size(); ++i) {
      const Edge &x = a.edges_[i], &y = b.edges_[i];
      if (x.id != y.id || x.tail != y.tail || x.head != y.head) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::size_t> edge_index_;
  std::vector<std::vector<std::size_t>> in_, out_;
};

// ---------------------------------------------------------------- file format

/// Parses `<edge_id> <tail> <head>` lines; `#` starts a comment.
inline Topology parse_topology(std::istream& in) {
  Topology t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string w; ss >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    if (tok.size() != 3)
      throw ParseError(lineno, "expected '<edge_id> <tail> <head>', got " + std::to_string(tok.size()) + " fields");
    try {
      t.add_edge(tok[0], tok[1], tok[2]);
    } catch (const DomainError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return t;
}

inline Topology parse_topology(const std::string& text) {
  std::istringstream ss(text);
  return parse_topology(ss);
}

inline Topology read_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read topology file '" + path + "'");
  return parse_topology(in);
}

/// Writes the edge list; `header` lines are emitted as `# ` comments first.
inline void write_topology(std::ostream& out, const Topology& t, const std::vector<std::string>& header = {}) {
  for (const auto& h : header) out << "# " << h << '\n';
  for (const auto& e : t.edges()) out << e.id << ' ' << t.node_name(e.tail) << ' ' << t.node_name(e.head) << '\n';
}

// ---------------------------------------------------------------- graph utilities

/// Kahn topological order of the directed graph; nullopt if there is a cycle.
inline std::optional<std::vector<std::size_t>> topological_order(const Topology& t) {
  std::vector<std::size_t> indeg(t.node_count()), order;
  order.reserve(t.node_count());
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < t.node_count(); ++v)
    if ((indeg[v] = t.in_degree(v)) == 0) ready.push(v);
  while (!ready.empty()) {
    const std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (auto e : t.out_edges(v))
      if (--indeg[t.edge(e).head] == 0) ready.push(t.edge(e).head);
  }
  if (order.size() != t.node_count()) return std::nullopt;
  return order;
}

inline bool is_acyclic(const Topology& t) { return topological_order(t).has_value(); }

/// Connectivity of the underlying undirected graph.
inline bool is_connected(const Topology& t) {
  if (t.node_count() == 0) return true;
  std::vector<char> seen(t.node_count(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (auto e : t.incident(v)) {
      const std::size_t w = t.opposite(e, v);
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == t.node_count();
}

/// Nodes reachable from `from` along directed edges, skipping edge `banned_edge`
/// and never entering `banned_node`. `from` is marked reachable.
inline std::vector<char> reachable(const Topology& t, const std::vector<std::size_t>& from,
                                   std::optional<std::size_t> banned_edge = std::nullopt,
                                   std::optional<std::size_t> banned_node = std::nullopt, bool backwards = false) {
  std::vector<char> seen(t.node_count(), 0);
  std::vector<std::size_t> stack;
  for (auto v : from)
    if (!seen[v] && v != banned_node) {
      seen[v] = 1;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (auto e : backwards ? t.in_edges(v) : t.out_edges(v)) {
      if (e == banned_edge) continue;
      const std::size_t w = backwards ? t.edge(e).tail : t.edge(e).head;
      if (!seen[w] && w != banned_node) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

// ---------------------------------------------------------------- configuration

/// A monitoring configuration: directed graph plus ordered sources and receivers.
struct Configuration {
  Topology topology;
  std::vector<std::size_t> sources;
  std::vector<std::size_t> receivers;

  std::size_t source_count() const noexcept { return sources.size(); }
  std::size_t receiver_count() const noexcept { return receivers.size(); }

  bool is_source(std::size_t v) const { return std::find(sources.begin(), sources.end(), v) != sources.end(); }
  bool is_receiver(std::size_t v) const {
    return std::find(receivers.begin(), receivers.end(), v) != receivers.end();
  }
  /// Position of v among the sources, or -1.
  int source_position(std::size_t v) const {
    auto it = std::find(sources.begin(), sources.end(), v);
    return it == sources.end() ? -1 : static_cast<int>(it - sources.begin());
  }

  /// Non-source nodes with in-degree >= 2 (they combine incoming probes).
  std::vector<std::size_t> coding_points() const {
    std::vector<std::size_t> r;
    for (std::size_t v = 0; v < topology.node_count(); ++v)
      if (!is_source(v) && topology.in_degree(v) >= 2) r.push_back(v);
    return r;
  }
  /// Nodes with out-degree >= 2 that are not sources.
  std::vector<std::size_t> branching_points() const {
    std::vector<std::size_t> r;
    for (std::size_t v = 0; v < topology.node_count(); ++v)
      if (!is_source(v) && topology.out_degree(v) >= 2) r.push_back(v);
    return r;
  }
  /// True when some node is both source and receiver (possible after orientation).
  bool has_overlap() const {
    for (auto s : sources)
      if (is_receiver(s)) return true;
    return false;
  }

  std::vector<std::string> source_names() const {
    std::vector<std::string> r;
    for (auto v : sources) r.push_back(topology.node_name(v));
    return r;
  }
  std::vector<std::string> receiver_names() const {
    std::vector<std::string> r;
    for (auto v : receivers) r.push_back(topology.node_name(v));
    return r;
  }
};

inline bool operator==(const Configuration& a, const Configuration& b) {
  return a.topology == b.topology && a.sources == b.sources && a.receivers == b.receivers;
}

/// Builds a configuration from explicit, ordered source and receiver names.
inline Configuration make_configuration(Topology topology, const std::vector<std::string>& sources,
                                        const std::vector<std::string>& receivers) {
  Configuration c;
  for (const auto& s : sources) {
    const std::size_t v = topology.node_index(s);
    if (c.is_source(v)) throw DomainError("duplicate source '" + s + "'");
    c.sources.push_back(v);
  }
  for (const auto& r : receivers) {
    const std::size_t v = topology.node_index(r);
    if (c.is_receiver(v)) throw DomainError("duplicate receiver '" + r + "'");
    c.receivers.push_back(v);
  }
  if (c.sources.empty()) throw DomainError("configuration needs at least one source");
  c.topology = std::move(topology);
  return c;
}

/// Derives receivers: every sink (out-degree 0) that is not a source, plus
/// sources with incoming edges, in node order.
inline Configuration make_configuration(Topology topology, const std::vector<std::string>& sources) {
  std::vector<char> is_src(topology.node_count(), 0);
  for (const auto& s : sources) is_src[topology.node_index(s)] = 1;
  std::vector<std::string> receivers;
  for (std::size_t v = 0; v < topology.node_count(); ++v) {
    const bool sink = topology.out_degree(v) == 0 && !is_src[v];
    const bool fed_source = is_src[v] && topology.in_degree(v) > 0;
    if (sink || fed_source) receivers.push_back(topology.node_name(v));
  }
  return make_configuration(std::move(topology), sources, receivers);
}

/// Default sources of a directed graph: nodes without incoming edges, in node order.
inline std::vector<std::string> default_sources(const Topology& t) {
  std::vector<std::string> r;
  for (std::size_t v = 0; v < t.node_count(); ++v)
    if (t.in_degree(v) == 0) r.push_back(t.node_name(v));
  return r;
}

/// The dual configuration: every edge reversed, sources and receivers swapped.
inline Configuration dual(const Configuration& c) {
  Configuration d;
  d.topology = c.topology.reversed();
  d.sources = c.receivers;
  d.receivers = c.sources;
  return d;
}

// ---------------------------------------------------------------- logical-link validation

struct Violation {
  std::string node;
  std::string rule;  // "degree", "in-degree", "out-degree"
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

struct ValidationOptions {
  /// When false, only the degree rule is checked (undirected input).
  bool directed = true;
  /// Interior sources may lack in-edges; interior receivers may lack out-edges.
  std::vector<std::string> sources;
  std::vector<std::string> receivers;
};

/// Interior (non-leaf) nodes must have degree >= 3, in-degree >= 1 and out-degree >= 1.
inline ValidationReport validate_logical(const Topology& t, const ValidationOptions& opt = {}) {
  ValidationReport rep;
  auto listed = [](const std::vector<std::string>& v, const std::string& n) {
    return std::find(v.begin(), v.end(), n) != v.end();
  };
  for (std::size_t v = 0; v < t.node_count(); ++v) {
    const std::size_t deg = t.degree(v);
    if (deg <= 1) continue;
    const std::string& name = t.node_name(v);
    if (deg < 3)
      rep.violations.push_back({name, "degree", "interior node has degree " + std::to_string(deg) + " < 3"});
    if (!opt.directed) continue;
    if (t.in_degree(v) == 0 && !listed(opt.sources, name))
      rep.violations.push_back({name, "in-degree", "interior node has no incoming edge"});
    if (t.out_degree(v) == 0 && !listed(opt.receivers, name))
      rep.violations.push_back({name, "out-degree", "interior node has no outgoing edge"});
  }
  return rep;
}

}  // namespace nctomo
