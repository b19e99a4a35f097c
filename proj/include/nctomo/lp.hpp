#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nctomo/error.hpp"
#include "nctomo/simplex.hpp"
#include "nctomo/topology.hpp"

namespace nctomo {

inline constexpr std::size_t kLpVariableLimit = 2000;

struct LpTerm {
  std::size_t var;
  double coef;
};

struct LpRow {
  std::string name;
  std::vector<LpTerm> terms;
  RowSense sense = RowSense::le;
  double rhs = 0;
};

/// Sparse LP: min sum cost*x subject to rows and box bounds.
struct LpModel {
  std::vector<std::string> names;
  std::vector<double> cost, lower, upper;
  std::vector<LpRow> rows;
  double rho = 1;
  std::vector<std::string> targets;  // edge ids of I

  std::size_t add_variable(const std::string& name, double c, double lo, double hi) {
    if (index_.count(name)) throw DomainError("duplicate LP variable " + name);
    index_[name] = names.size();
    names.push_back(name);
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return names.size() - 1;
  }
  std::size_t variable(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw DomainError("unknown LP variable " + name);
    return it->second;
  }
  bool has_variable(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t variable_count() const { return names.size(); }

 private:
  std::map<std::string, std::size_t> index_;
};

/// Variable layout of the probe-routing model on the graph augmented with a
/// super-source (edges to every source) and a super-receiver (edges from
/// every receiver).
struct RoutingLp {
  LpModel model;
  std::vector<std::size_t> total;                 // f(e) per augmented edge
  std::vector<std::vector<std::size_t>> conceptual; // f^i(e) per target, per augmented edge
  std::vector<std::size_t> target_edges;          // real edge index of each target
  std::vector<std::string> augmented_names;       // e<idx>, src<j>, rcv<j>
  std::vector<std::string> augmented_ids;         // edge id, "S>"+source, receiver+">R"
};

/// Minimum-cost probe routing: every target edge e_i = (u_i, v_i) needs its own
/// conceptual flow that brings at least rho into u_i, takes at least rho out of
/// v_i and touches 3 rho at each endpoint, while sharing capacity through
/// f^i(e) <= f(e) <= rho.
inline RoutingLp build_min_cost_lp(const Configuration& cfg, const std::vector<std::string>& target_ids, double rho,
                                   const std::vector<double>& costs = {}) {
  const Topology& t = cfg.topology;
  if (cfg.sources.empty() || cfg.receivers.empty()) throw DomainError("routing needs sources and receivers");
  if (!(rho > 0) || !std::isfinite(rho)) throw DomainError("probe rate must be positive");
  if (!costs.empty() && costs.size() != t.edge_count()) throw DomainError("one cost per edge is required");
  RoutingLp r;
  for (const auto& id : target_ids) {
    auto e = t.find_edge(id);
    if (!e) throw DomainError("target edge " + id + " is not in the graph");
    if (std::find(r.target_edges.begin(), r.target_edges.end(), *e) != r.target_edges.end())
      throw DomainError("target edge " + id + " listed twice");
    r.target_edges.push_back(*e);
  }
  const std::size_t n = t.node_count(), m = t.edge_count();
  const std::size_t super_s = n, super_r = n + 1;
  std::vector<std::pair<std::size_t, std::size_t>> ends;  // augmented (tail, head)
  for (std::size_t e = 0; e < m; ++e) {
    ends.emplace_back(t.edge(e).tail, t.edge(e).head);
    r.augmented_names.push_back("e" + std::to_string(e));
    r.augmented_ids.push_back(t.edge(e).id);
  }
  for (std::size_t j = 0; j < cfg.sources.size(); ++j) {
    ends.emplace_back(super_s, cfg.sources[j]);
    r.augmented_names.push_back("src" + std::to_string(j));
    r.augmented_ids.push_back("S>" + t.node_name(cfg.sources[j]));
  }
  for (std::size_t j = 0; j < cfg.receivers.size(); ++j) {
    ends.emplace_back(cfg.receivers[j], super_r);
    r.augmented_names.push_back("rcv" + std::to_string(j));
    r.augmented_ids.push_back(t.node_name(cfg.receivers[j]) + ">R");
  }
  const std::size_t ma = ends.size();
  const double aug_cap = 10.0 * rho * static_cast<double>(r.target_edges.size());
  const double inf = std::numeric_limits<double>::infinity();

  LpModel& lp = r.model;
  lp.rho = rho;
  lp.targets = target_ids;
  for (std::size_t e = 0; e < ma; ++e) {
    const bool real = e < m;
    lp.add_variable("f_" + r.augmented_names[e], real ? (costs.empty() ? 1.0 : costs[e]) : 0.0, 0.0,
                    real ? rho : aug_cap);
    r.total.push_back(e);
  }
  for (std::size_t i = 0; i < r.target_edges.size(); ++i) {
    std::vector<std::size_t> vars;
    for (std::size_t e = 0; e < ma; ++e)
      vars.push_back(lp.add_variable("c" + std::to_string(i) + "_" + r.augmented_names[e], 0.0, 0.0, inf));
    r.conceptual.push_back(std::move(vars));
  }
  if (lp.variable_count() > kLpVariableLimit)
    throw CapacityError("routing LP has " + std::to_string(lp.variable_count()) + " variables; the limit is " +
                        std::to_string(kLpVariableLimit));

  for (auto e : r.target_edges) lp.rows.push_back({"fix_e" + std::to_string(e), {{e, 1.0}}, RowSense::eq, rho});
  for (std::size_t i = 0; i < r.target_edges.size(); ++i) {
    const auto& c = r.conceptual[i];
    const std::string tag = "t" + std::to_string(i);
    const auto [u, v] = ends[r.target_edges[i]];
    for (std::size_t e = 0; e < ma; ++e)
      lp.rows.push_back({tag + "_cap_" + r.augmented_names[e], {{c[e], 1.0}, {r.total[e], -1.0}}, RowSense::le, 0.0});
    // super-source has no in-edges and super-receiver no out-edges, so their
    // zero-inflow / zero-outflow conditions hold identically
    for (std::size_t x = 0; x < n; ++x) {
      if (x == u || x == v) continue;
      LpRow row{tag + "_bal_n" + std::to_string(x), {}, RowSense::eq, 0.0};
      for (std::size_t e = 0; e < ma; ++e) {
        if (ends[e].second == x) row.terms.push_back({c[e], 1.0});
        if (ends[e].first == x) row.terms.push_back({c[e], -1.0});
      }
      if (!row.terms.empty()) lp.rows.push_back(std::move(row));
    }
    auto flow_row = [&](const std::string& name, std::size_t x, bool in, bool out, double b) {
      LpRow row{tag + "_" + name, {}, RowSense::ge, b};
      for (std::size_t e = 0; e < ma; ++e)
        if ((in && ends[e].second == x) || (out && ends[e].first == x)) row.terms.push_back({c[e], 1.0});
      lp.rows.push_back(std::move(row));
    };
    flow_row("in_u", u, true, false, rho);
    flow_row("inout_u", u, true, true, 3 * rho);
    flow_row("out_v", v, false, true, rho);
    flow_row("inout_v", v, true, true, 3 * rho);
  }
  return r;
}

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0;
  std::vector<double> values;
  double residual = 0;                    // worst row/bound violation
  double infeasibility = 0;
  std::vector<std::string> certificate;   // rows that cannot be satisfied
  std::size_t pivots = 0;

  bool optimal() const { return status == LpStatus::optimal; }
};

inline DenseLp to_dense(const LpModel& lp) {
  DenseLp d;
  d.cost = lp.cost;
  d.lower = lp.lower;
  d.upper = lp.upper;
  for (const auto& row : lp.rows) {
    std::vector<double> a(lp.variable_count(), 0.0);
    for (const auto& term : row.terms) {
      if (term.var >= lp.variable_count()) throw DomainError("row " + row.name + " references an undeclared variable");
      a[term.var] += term.coef;
    }
    d.a.push_back(std::move(a));
    d.sense.push_back(row.sense);
    d.rhs.push_back(row.rhs);
  }
  return d;
}

inline double lp_residual(const LpModel& lp, const std::vector<double>& x) {
  double worst = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    if (std::isfinite(lp.upper[j])) worst = std::max(worst, x[j] - lp.upper[j]);
  }
  for (const auto& row : lp.rows) {
    double s = 0;
    for (const auto& term : row.terms) s += term.coef * x[term.var];
    const double d = s - row.rhs;
    worst = std::max(worst, row.sense == RowSense::le ? d : row.sense == RowSense::ge ? -d : std::abs(d));
  }
  return worst;
}

inline LpSolution solve_lp(const LpModel& lp, double tolerance = 1e-7) {
  if (lp.variable_count() > kLpVariableLimit)
    throw CapacityError("LP has " + std::to_string(lp.variable_count()) + " variables; the limit is " +
                        std::to_string(kLpVariableLimit));
  const auto res = simplex_solve(to_dense(lp));
  LpSolution s;
  s.status = res.status;
  s.pivots = res.pivots;
  if (res.status == LpStatus::infeasible) {
    s.infeasibility = res.infeasibility;
    for (auto i : res.violated) s.certificate.push_back(lp.rows[i].name);
    return s;
  }
  if (res.status == LpStatus::unbounded) return s;
  s.values = res.x;
  for (auto& v : s.values)
    if (std::abs(v) < 1e-12) v = 0;
  s.objective = res.objective;
  s.residual = lp_residual(lp, s.values);
  if (s.residual > tolerance)
    throw DomainError("LP solution violates its constraints by " + std::to_string(s.residual));
  return s;
}

// ---- text format ---------------------------------------------------------

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) return "0";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline double parse_number(const std::string& s, std::size_t line) {
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  if (s == "-inf" || s == "-infinity") return -std::numeric_limits<double>::infinity();
  double v = 0;
  const char* b = s.data() + (s.size() > 1 && s[0] == '+' ? 1 : 0);
  auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(line, "expected a number, got '" + s + "'");
  return v;
}

namespace detail {

inline void write_terms(std::ostream& out, const LpModel& lp, const std::vector<LpTerm>& terms) {
  for (const auto& t : terms)
    out << ' ' << (std::signbit(t.coef) ? '-' : '+') << ' ' << format_number(std::abs(t.coef)) << ' '
        << lp.names[t.var];
}

inline const char* sense_token(RowSense s) {
  return s == RowSense::le ? "<=" : s == RowSense::ge ? ">=" : "=";
}

}  // namespace detail

/// CPLEX-style free-form LP text. Every variable is listed in the objective and
/// in Bounds, so declaration order survives a round trip.
inline void serialize_lp(std::ostream& out, const LpModel& lp) {
  out << "\\ nctomo lp\n";
  out << "\\ rho " << format_number(lp.rho) << '\n';
  if (!lp.targets.empty()) {
    out << "\\ targets";
    for (const auto& t : lp.targets) out << ' ' << t;
    out << '\n';
  }
  out << "Minimize\n obj:";
  std::vector<LpTerm> obj;
  for (std::size_t j = 0; j < lp.variable_count(); ++j) obj.push_back({j, lp.cost[j]});
  detail::write_terms(out, lp, obj);
  out << '\n';
  if (!lp.rows.empty()) {
    out << "Subject To\n";
    for (const auto& row : lp.rows) {
      out << ' ' << row.name << ':';
      detail::write_terms(out, lp, row.terms);
      out << ' ' << detail::sense_token(row.sense) << ' ' << format_number(row.rhs) << '\n';
    }
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < lp.variable_count(); ++j) {
    if (lp.lower[j] == lp.upper[j])
      out << ' ' << lp.names[j] << " = " << format_number(lp.lower[j]) << '\n';
    else if (std::isinf(lp.upper[j]))
      out << ' ' << lp.names[j] << " >= " << format_number(lp.lower[j]) << '\n';
    else
      out << ' ' << format_number(lp.lower[j]) << " <= " << lp.names[j] << " <= " << format_number(lp.upper[j])
          << '\n';
  }
  out << "End\n";
}

inline std::string serialize_lp(const LpModel& lp) {
  std::ostringstream os;
  serialize_lp(os, lp);
  return os.str();
}

/// Reads the subset of the LP text format written by serialize_lp.
inline LpModel parse_lp(std::istream& in) {
  LpModel lp;
  enum { none, objective, rows, bounds, done } section = none;
  std::string line;
  std::size_t no = 0;
  auto tokens_of = [](const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> v;
    for (std::string w; is >> w;) v.push_back(w);
    return v;
  };
  // "+ 2 x - 1 y ..." starting at token k; stops at a sense token
  auto read_terms = [&](const std::vector<std::string>& tok, std::size_t& k, bool declare) {
    std::vector<LpTerm> terms;
    while (k < tok.size() && tok[k] != "<=" && tok[k] != ">=" && tok[k] != "=") {
      if (tok[k] != "+" && tok[k] != "-") throw ParseError(no, "expected '+' or '-', got '" + tok[k] + "'");
      if (k + 2 >= tok.size()) throw ParseError(no, "truncated term");
      const double c = parse_number(tok[k + 1], no) * (tok[k] == "-" ? -1.0 : 1.0);
      const std::string& name = tok[k + 2];
      std::size_t var;
      if (declare) {
        var = lp.add_variable(name, c, 0.0, std::numeric_limits<double>::infinity());
      } else {
        if (!lp.has_variable(name)) throw ParseError(no, "undeclared variable " + name);
        var = lp.variable(name);
      }
      terms.push_back({var, c});
      k += 3;
    }
    return terms;
  };
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("\\", 0) == 0) {
      const auto tok = tokens_of(line.substr(1));
      if (tok.size() == 2 && tok[0] == "rho") lp.rho = parse_number(tok[1], no);
      if (!tok.empty() && tok[0] == "targets") lp.targets.assign(tok.begin() + 1, tok.end());
      continue;
    }
    const auto tok = tokens_of(line);
    if (tok.empty()) continue;
    if (line[0] != ' ') {
      if (tok.size() == 1 && tok[0] == "Minimize") section = objective;
      else if (tok.size() == 2 && tok[0] == "Subject" && tok[1] == "To") section = rows;
      else if (tok.size() == 1 && tok[0] == "Bounds") section = bounds;
      else if (tok.size() == 1 && tok[0] == "End") section = done;
      else throw ParseError(no, "unknown section '" + line + "'");
      continue;
    }
    switch (section) {
      case objective: {
        if (tok[0] != "obj:") throw ParseError(no, "objective must be labelled 'obj:'");
        std::size_t k = 1;
        read_terms(tok, k, true);
        if (k != tok.size()) throw ParseError(no, "unexpected token in objective");
        break;
      }
      case rows: {
        if (tok[0].size() < 2 || tok[0].back() != ':') throw ParseError(no, "constraint needs a 'name:' label");
        LpRow row;
        row.name = tok[0].substr(0, tok[0].size() - 1);
        std::size_t k = 1;
        row.terms = read_terms(tok, k, false);
        if (k + 2 != tok.size()) throw ParseError(no, "constraint needs '<=', '>=' or '=' and a right-hand side");
        row.sense = tok[k] == "<=" ? RowSense::le : tok[k] == ">=" ? RowSense::ge : RowSense::eq;
        row.rhs = parse_number(tok[k + 1], no);
        lp.rows.push_back(std::move(row));
        break;
      }
      case bounds: {
        auto var = [&](const std::string& name) {
          if (!lp.has_variable(name)) throw ParseError(no, "undeclared variable " + name);
          return lp.variable(name);
        };
        if (tok.size() == 3 && tok[1] == "=") {
          const auto j = var(tok[0]);
          lp.lower[j] = lp.upper[j] = parse_number(tok[2], no);
        } else if (tok.size() == 3 && tok[1] == ">=") {
          const auto j = var(tok[0]);
          lp.lower[j] = parse_number(tok[2], no);
          lp.upper[j] = std::numeric_limits<double>::infinity();
        } else if (tok.size() == 5 && tok[1] == "<=" && tok[3] == "<=") {
          const auto j = var(tok[2]);
          lp.lower[j] = parse_number(tok[0], no);
          lp.upper[j] = parse_number(tok[4], no);
        } else {
          throw ParseError(no, "unrecognised bound");
        }
        break;
      }
      default: throw ParseError(no, "content outside a section");
    }
  }
  if (section != done) throw ParseError(no, "missing 'End'");
  return lp;
}

inline LpModel parse_lp(const std::string& text) {
  std::istringstream is(text);
  return parse_lp(is);
}

/// Post-solve check: f^i(e) <= f(e) <= rho on every real edge.
inline bool routing_solution_consistent(const RoutingLp& r, const std::vector<double>& x, std::size_t real_edges,
                                        double tol = 1e-7) {
  for (std::size_t e = 0; e < real_edges; ++e) {
    const double f = x[r.total[e]];
    if (f > r.model.rho + tol || f < -tol) return false;
    for (const auto& c : r.conceptual)
      if (x[c[e]] > f + tol) return false;
  }
  return true;
}

/// Flow table: edge, f, then f^i per target.
inline void write_flow_csv(std::ostream& out, const RoutingLp& r, const LpSolution& s) {
  out << "edge,f";
  for (const auto& t : r.model.targets) out << ",f_" << t;
  out << '\n';
  for (std::size_t e = 0; e < r.total.size(); ++e) {
    out << r.augmented_ids[e] << ',' << format_number(s.values[r.total[e]]);
    for (const auto& c : r.conceptual) out << ',' << format_number(s.values[c[e]]);
    out << '\n';
  }
}

/// Real edges carrying flow, as a configuration over the same nodes.
inline Configuration flow_support(const Configuration& cfg, const RoutingLp& r, const LpSolution& s,
                                  double tol = 1e-9) {
  Topology sub;
  const Topology& t = cfg.topology;
  for (std::size_t v = 0; v < t.node_count(); ++v) sub.add_node(t.node_name(v));
  for (std::size_t e = 0; e < t.edge_count(); ++e)
    if (s.values[r.total[e]] > tol) sub.add_edge(t.edge(e).id, t.node_name(t.edge(e).tail), t.node_name(t.edge(e).head));
  return make_configuration(std::move(sub), cfg.source_names(), cfg.receiver_names());
}

}  // namespace nctomo
