#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nctomo/code.hpp"
#include "nctomo/paths.hpp"
#include "nctomo/report.hpp"
#include "nctomo/simulate.hpp"

namespace nctomo {

/// Bipartite graph: one variable per edge, one factor per observable path.
struct FactorGraph {
  std::vector<std::string> edge_ids;
  std::vector<std::vector<std::size_t>> factors;           // path -> member edges
  std::vector<std::vector<std::size_t>> variable_factors;  // edge -> paths through it

  std::size_t variable_count() const noexcept { return edge_ids.size(); }
  std::size_t factor_count() const noexcept { return factors.size(); }
};

inline FactorGraph build_factor_graph(const Configuration& cfg, const PathSet& ps) {
  FactorGraph fg;
  for (const auto& e : cfg.topology.edges()) fg.edge_ids.push_back(e.id);
  fg.variable_factors.assign(fg.edge_ids.size(), {});
  for (std::size_t i = 0; i < ps.paths.size(); ++i) {
    std::vector<std::size_t> members = ps.paths[i].edges;
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (auto e : members) fg.variable_factors[e].push_back(i);
    fg.factors.push_back(std::move(members));
  }
  return fg;
}

/// Path-state patterns (1 = path worked) with counts.
struct PathStateHistogram {
  std::size_t paths = 0;
  std::map<std::vector<std::uint8_t>, double> counts;
  double total = 0;

  void add(const std::vector<std::uint8_t>& s, double w) {
    counts[s] += w;
    total += w;
  }
};

/// Decodes every outcome into path states through the path table (tree mode uses
/// the XOR code, where each triplet holds a single path).
inline PathStateHistogram observe_path_states(const Configuration& cfg, const PathSet& ps, const PathTable& table,
                                              const OutcomeHistogram& h, Ambiguity rule = Ambiguity::pick_first) {
  const ObservationLayout layout(cfg);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> slot_of;
  for (std::size_t s = 0; s < layout.slots.size(); ++s) slot_of[layout.slots[s]] = s;
  std::vector<std::size_t> offset;
  for (const auto& tr : ps.triplets)
    offset.push_back(slot_of.at({tr.receiver, tr.in_edge}) * layout.sources +
                     static_cast<std::size_t>(cfg.source_position(tr.source)));
  PathStateHistogram out;
  out.paths = ps.paths.size();
  std::vector<std::uint32_t> symbols(ps.triplets.size());
  std::vector<std::uint8_t> states(ps.paths.size());
  for (const auto& [x, w] : h.counts) {
    if (x.size() != layout.width()) throw DomainError("histogram does not match the configuration");
    for (std::size_t i = 0; i < symbols.size(); ++i) symbols[i] = x[offset[i]];
    const auto masks = decode_observation(table, symbols, rule);
    std::fill(states.begin(), states.end(), 0);
    for (std::size_t i = 0; i < ps.triplets.size(); ++i)
      for (std::size_t b = 0; b < ps.triplets[i].paths.size(); ++b)
        if ((masks[i] >> b) & 1) states[ps.triplets[i].paths[b]] = 1;
    out.add(states, w);
  }
  return out;
}

enum class BpEngine {
  automatic,   // tree_exact when the network is a tree with few sources, else loopy
  loopy,       // damped sum-product on the link/path factor graph
  tree_exact,  // cycle-free sum-product over per-node "sources reaching here" states
};

inline const char* to_string(BpEngine e) {
  switch (e) {
    case BpEngine::loopy: return "loopy";
    case BpEngine::tree_exact: return "tree_exact";
    default: return "automatic";
  }
}

inline constexpr std::size_t kTreeEngineMaxSources = 6;

struct BpOptions {
  double kappa = 0.9;           // scales variable-to-factor messages (loopy engine)
  std::size_t iterations = 100; // message sweeps per pattern (loopy engine)
  double tolerance = 1e-6;      // message residual
  std::size_t outer_iterations = 2000;  // rate updates
  double outer_tolerance = 1e-7;
  double initial_alpha = 0.9;
  BpEngine engine = BpEngine::automatic;
  bool accelerate = true;       // squared extrapolation of the rate iteration
};

namespace detail {

// One distinct path-state pattern after propagating hard evidence.
struct BpPattern {
  double weight = 0;
  std::vector<std::int8_t> fixed;                 // -1 free, 0 down, 1 up
  std::vector<std::size_t> vars;                  // free variables touched by factors
  std::vector<std::vector<std::uint32_t>> factors; // indices into vars
  std::vector<std::vector<double>> mu;            // factor -> member LLR messages (warm start)
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline BpPattern prepare_pattern(const FactorGraph& fg, const std::vector<std::uint8_t>& states, double w,
                                 std::size_t& contradictions) {
  BpPattern p;
  p.weight = w;
  p.fixed.assign(fg.variable_count(), -1);
  for (std::size_t f = 0; f < fg.factor_count(); ++f)
    if (states[f])
      for (auto e : fg.factors[f]) p.fixed[e] = 1;
  std::vector<std::vector<std::size_t>> failed;
  for (std::size_t f = 0; f < fg.factor_count(); ++f) {
    if (states[f]) continue;
    std::vector<std::size_t> rest;
    for (auto e : fg.factors[f])
      if (p.fixed[e] != 1) rest.push_back(e);
    if (rest.empty())
      ++contradictions;
    else
      failed.push_back(std::move(rest));
  }
  // unit propagation: a failed path with one unknown link pins it down
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::vector<std::size_t>> keep;
    for (auto& f : failed) {
      if (std::any_of(f.begin(), f.end(), [&](std::size_t e) { return p.fixed[e] == 0; })) continue;
      if (f.size() == 1) {
        p.fixed[f[0]] = 0;
        changed = true;
        continue;
      }
      keep.push_back(std::move(f));
    }
    failed = std::move(keep);
  }
  std::sort(failed.begin(), failed.end());
  failed.erase(std::unique(failed.begin(), failed.end()), failed.end());
  std::vector<std::vector<std::size_t>> minimal;
  for (std::size_t i = 0; i < failed.size(); ++i) {
    bool superset = false;
    for (std::size_t j = 0; j < failed.size() && !superset; ++j)
      superset = j != i && failed[j].size() < failed[i].size() &&
                 std::includes(failed[i].begin(), failed[i].end(), failed[j].begin(), failed[j].end());
    if (!superset) minimal.push_back(failed[i]);
  }
  std::map<std::size_t, std::uint32_t> local;
  for (const auto& f : minimal)
    for (auto e : f) local.emplace(e, 0);
  for (auto& [e, idx] : local) {
    idx = static_cast<std::uint32_t>(p.vars.size());
    p.vars.push_back(e);
  }
  for (const auto& f : minimal) {
    std::vector<std::uint32_t> lf;
    for (auto e : f) lf.push_back(local.at(e));
    p.factors.push_back(std::move(lf));
    p.mu.emplace_back(f.size(), 0.0);
  }
  return p;
}

// Damped sum-product on the "at least one member down" factors; returns the
// number of sweeps and writes P(up) per local variable.
inline std::size_t run_bp(BpPattern& p, const std::vector<double>& prior_llr, const BpOptions& opt,
                          std::vector<double>& post, bool& converged) {
  const std::size_t nv = p.vars.size();
  std::vector<double> total(nv);
  std::vector<double> q, prefix, suffix;
  std::size_t sweep = 0;
  converged = false;
  while (sweep < opt.iterations) {
    ++sweep;
    for (std::size_t i = 0; i < nv; ++i) total[i] = prior_llr[p.vars[i]];
    for (std::size_t f = 0; f < p.factors.size(); ++f)
      for (std::size_t k = 0; k < p.factors[f].size(); ++k) total[p.factors[f][k]] += p.mu[f][k];
    double residual = 0;
    for (std::size_t f = 0; f < p.factors.size(); ++f) {
      const auto& mem = p.factors[f];
      const std::size_t d = mem.size();
      q.resize(d);
      prefix.assign(d + 1, 1.0);
      suffix.assign(d + 1, 1.0);
      for (std::size_t k = 0; k < d; ++k) q[k] = sigmoid(opt.kappa * (total[mem[k]] - p.mu[f][k]));
      for (std::size_t k = 0; k < d; ++k) prefix[k + 1] = prefix[k] * q[k];
      for (std::size_t k = d; k-- > 0;) suffix[k] = suffix[k + 1] * q[k];
      for (std::size_t k = 0; k < d; ++k) {
        const double others_up = prefix[k] * suffix[k + 1];
        const double m = std::log(std::max(1.0 - others_up, 1e-300));
        residual = std::max(residual, std::abs(m - p.mu[f][k]));
        p.mu[f][k] = m;
      }
    }
    if (residual < opt.tolerance) {
      converged = true;
      break;
    }
  }
  for (std::size_t i = 0; i < nv; ++i) total[i] = prior_llr[p.vars[i]];
  for (std::size_t f = 0; f < p.factors.size(); ++f)
    for (std::size_t k = 0; k < p.factors[f].size(); ++k) total[p.factors[f][k]] += p.mu[f][k];
  post.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) post[i] = sigmoid(total[i]);
  return sweep;
}

}  // namespace detail

namespace detail {

struct FixedPoint {
  std::vector<double> alpha;
  std::size_t evaluations = 0;
  double delta = 0;
  bool converged = false;
};

// Iterates alpha <- F(alpha), optionally with SQUAREM-style extrapolation
// (Varadhan & Roland), which keeps the monotone EM fixed point but needs far
// fewer map evaluations.
template <class Map>
FixedPoint rate_fixed_point(std::vector<double> alpha, Map&& map, const BpOptions& opt) {
  FixedPoint fp;
  const std::size_t nv = alpha.size();
  auto eval = [&](const std::vector<double>& a) {
    ++fp.evaluations;
    return map(a);
  };
  auto dist = [](const std::vector<double>& x, const std::vector<double>& y) {
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
    return d;
  };
  while (fp.evaluations < opt.outer_iterations) {
    std::vector<double> next;
    if (opt.accelerate) {
      const auto a1 = eval(alpha);
      if (dist(a1, alpha) < opt.outer_tolerance) {
        fp.delta = dist(a1, alpha);
        alpha = a1;
        fp.converged = true;
        break;
      }
      const auto a2 = eval(a1);
      double rr = 0, vv = 0;
      std::vector<double> r(nv), v(nv), x(nv);
      for (std::size_t i = 0; i < nv; ++i) {
        r[i] = a1[i] - alpha[i];
        v[i] = a2[i] - a1[i] - r[i];
        rr += r[i] * r[i];
        vv += v[i] * v[i];
      }
      double step = vv > 0 ? -std::sqrt(rr / vv) : -1.0;
      if (step > -1.0) step = -1.0;
      for (std::size_t i = 0; i < nv; ++i)
        x[i] = std::clamp(alpha[i] - 2 * step * r[i] + step * step * v[i], 1e-6, 1.0 - 1e-9);
      next = eval(x);
    } else {
      next = eval(alpha);
    }
    fp.delta = dist(next, alpha);
    alpha.swap(next);
    if (fp.delta < opt.outer_tolerance) {
      fp.converged = true;
      break;
    }
  }
  fp.alpha = std::move(alpha);
  return fp;
}

// ---- exact engine for tree networks

// Evidence of one pattern: the set of sources whose probes arrived over each
// receiver in-edge (-1 where unobserved).
struct TreePattern {
  double weight = 0;
  std::vector<std::int32_t> seen;
};

class TreeMessagePlan {
 public:
  static constexpr std::size_t kMaxDomain = std::size_t{1} << kTreeEngineMaxSources;

  explicit TreeMessagePlan(const Configuration& cfg)
      : cfg_(&cfg), t_(&cfg.topology), d_(std::size_t{1} << cfg.sources.size()) {
    const std::size_t m = t_->edge_count();
    for (auto* buf : {&u_, &b_, &tt_, &dn_}) buf->assign(m * d_, 0.0);
    for (auto* st : {&su_, &sb_, &stt_, &sdn_}) st->assign(m, 0);
  }

  std::size_t domain() const { return d_; }

  // Posterior P(edge up) for every edge, given the current rates.
  void posterior(const TreePattern& p, const std::vector<double>& alpha, std::vector<double>& out) {
    const std::size_t m = t_->edge_count();
    ++stamp_;
    pat_ = &p;
    alpha_ = &alpha;
    out.assign(m, 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      const double* mu = up(e);
      const double* mb = down(e);
      const double a = alpha[e];
      double num = 0, den = 0;
      const double zero = ev(e, 0) * mb[0];
      for (std::size_t o = 1; o < d_; ++o) {
        if (mu[o] == 0) continue;
        const double hit = ev(e, o) * mb[o];
        num += mu[o] * a * hit;
        den += mu[o] * (a * hit + (1 - a) * zero);
      }
      num += mu[0] * zero * a;
      den += mu[0] * zero;
      out[e] = den > 0 ? num / den : a;
    }
  }

 private:
  double ev(std::size_t e, std::size_t t) const {
    const auto s = pat_->seen[e];
    return s < 0 || static_cast<std::size_t>(s) == t ? 1.0 : 0.0;
  }

  void normalize(double* v) const {
    double s = 0;
    for (std::size_t i = 0; i < d_; ++i) s += v[i];
    if (s > 0)
      for (std::size_t i = 0; i < d_; ++i) v[i] /= s;
  }

  // distribution of the OR of the sets carried by `edges` (except `skip`)
  void or_combine(const std::vector<std::size_t>& edges, std::size_t skip, double* acc) {
    for (auto e : edges)
      if (e != skip) transmitted(e);  // fill memo before using scratch space
    std::array<double, kMaxDomain> tmp{};
    std::fill(acc, acc + d_, 0.0);
    acc[0] = 1;
    for (auto e : edges) {
      if (e == skip) continue;
      const double* te = &tt_[e * d_];
      std::fill(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(d_), 0.0);
      for (std::size_t x = 0; x < d_; ++x) {
        if (acc[x] == 0) continue;
        for (std::size_t y = 0; y < d_; ++y)
          if (te[y] != 0) tmp[x | y] += acc[x] * te[y];
      }
      std::copy(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(d_), acc);
    }
  }

  // message on out(tail e) from the tail side of e
  const double* up(std::size_t e) {
    double* r = &u_[e * d_];
    if (su_[e] == stamp_) return r;
    const std::size_t u = t_->edge(e).tail;
    if (int pos = cfg_->source_position(u); pos >= 0) {
      std::fill(r, r + d_, 0.0);
      r[std::size_t{1} << pos] = 1;
    } else {
      for (auto f : t_->out_edges(u))
        if (f != e) downstream(f);
      or_combine(t_->in_edges(u), static_cast<std::size_t>(-1), r);
      for (auto f : t_->out_edges(u)) {
        if (f == e) continue;
        const double* d = &dn_[f * d_];
        for (std::size_t s = 0; s < d_; ++s) r[s] *= d[s];
      }
    }
    normalize(r);
    su_[e] = stamp_;
    return r;
  }

  // message on the set carried by e from the tail side, evidence included
  const double* transmitted(std::size_t e) {
    double* r = &tt_[e * d_];
    if (stt_[e] == stamp_) return r;
    const double* mu = up(e);
    const double a = (*alpha_)[e];
    r[0] = mu[0];
    for (std::size_t o = 1; o < d_; ++o) {
      r[o] = a * mu[o];
      r[0] += (1 - a) * mu[o];
    }
    for (std::size_t t = 0; t < d_; ++t) r[t] *= ev(e, t);
    normalize(r);
    stt_[e] = stamp_;
    return r;
  }

  // message on the set carried by e from the head side
  const double* down(std::size_t e) {
    double* r = &b_[e * d_];
    if (sb_[e] == stamp_) return r;
    const std::size_t w = t_->edge(e).head;  // never a source (no in-edges there)
    for (auto f : t_->out_edges(w)) downstream(f);
    std::array<double, kMaxDomain> value, rest;
    std::fill(value.begin(), value.begin() + static_cast<std::ptrdiff_t>(d_), 1.0);
    for (auto f : t_->out_edges(w)) {
      const double* d = &dn_[f * d_];
      for (std::size_t s = 0; s < d_; ++s) value[s] *= d[s];
    }
    or_combine(t_->in_edges(w), e, rest.data());
    std::fill(r, r + d_, 0.0);
    for (std::size_t m = 0; m < d_; ++m) {
      if (rest[m] == 0) continue;
      for (std::size_t t = 0; t < d_; ++t) r[t] += rest[m] * value[t | m];
    }
    normalize(r);
    sb_[e] = stamp_;
    return r;
  }

  // message on out(tail e) from the head side, through the edge
  const double* downstream(std::size_t e) {
    double* r = &dn_[e * d_];
    if (sdn_[e] == stamp_) return r;
    const double* mb = down(e);
    const double a = (*alpha_)[e];
    const double zero = ev(e, 0) * mb[0];
    r[0] = zero;
    for (std::size_t o = 1; o < d_; ++o) r[o] = a * ev(e, o) * mb[o] + (1 - a) * zero;
    normalize(r);
    sdn_[e] = stamp_;
    return r;
  }

  const Configuration* cfg_;
  const Topology* t_;
  std::size_t d_;
  const TreePattern* pat_ = nullptr;
  const std::vector<double>* alpha_ = nullptr;
  std::vector<double> u_, b_, tt_, dn_;
  std::vector<std::uint64_t> su_, sb_, stt_, sdn_;
  std::uint64_t stamp_ = 0;
};

inline EstimateReport finish_bp_report(const std::vector<std::string>& ids, const FixedPoint& fp, const char* engine) {
  EstimateReport rep;
  rep.estimator = "bp";
  rep.edge_ids = ids;
  rep.alpha.assign(ids.size(), 1.0);
  rep.raw.assign(ids.size(), 1.0);
  rep.status.assign(ids.size(), EdgeStatus::ok);
  for (std::size_t e = 0; e < ids.size(); ++e) rep.set(e, fp.alpha[e]);
  rep.diagnostics.iterations = fp.evaluations;
  rep.diagnostics.residual = fp.delta;
  rep.diagnostics.converged = fp.converged;
  rep.diagnostics.notes.push_back(std::string("engine: ") + engine);
  if (!fp.converged) rep.diagnostics.notes.push_back("rate iteration stopped before reaching the tolerance");
  return rep;
}

inline void check_bp_options(const BpOptions& opt) {
  if (!(opt.kappa > 0 && opt.kappa <= 1)) throw DomainError("BP damping kappa must lie in (0, 1]");
  if (opt.iterations == 0 || opt.outer_iterations == 0) throw DomainError("BP iteration limits must be positive");
  if (!(opt.initial_alpha > 0 && opt.initial_alpha < 1)) throw DomainError("BP initial rate must lie in (0, 1)");
}

}  // namespace detail

/// Link success rates from path states with the loopy engine. Each distinct
/// pattern is one evidence instance: worked paths pin their links up, failed
/// paths become factors "some member link is down". Per pattern, damped
/// sum-product (priors = current rates) yields posterior up-marginals; their
/// count-weighted mean is the next rate vector, iterated to a fixed point.
inline EstimateReport bp_estimate(const FactorGraph& fg, const PathStateHistogram& states,
                                  const BpOptions& opt = {}) {
  if (states.paths != fg.factor_count()) throw DomainError("path states do not match the factor graph");
  if (states.total <= 0) throw DomainError("no path-state observations");
  detail::check_bp_options(opt);
  const std::size_t nv = fg.variable_count();
  std::size_t contradictions = 0;
  std::vector<detail::BpPattern> patterns;
  for (const auto& [s, w] : states.counts) patterns.push_back(detail::prepare_pattern(fg, s, w, contradictions));

  std::size_t inner_total = 0, inner_failures = 0;
  std::vector<double> llr(nv), post;
  auto map = [&](const std::vector<double>& alpha) {
    for (std::size_t e = 0; e < nv; ++e) {
      const double a = std::clamp(alpha[e], 1e-12, 1 - 1e-12);
      llr[e] = std::log(a / (1 - a));
    }
    std::vector<double> next(nv, 0.0);
    std::vector<char> done(nv);
    for (auto& p : patterns) {
      bool ok = true;
      if (!p.factors.empty()) {
        inner_total += detail::run_bp(p, llr, opt, post, ok);
        if (!ok) ++inner_failures;
      }
      std::fill(done.begin(), done.end(), 0);
      for (std::size_t i = 0; i < p.vars.size(); ++i) {
        next[p.vars[i]] += p.weight * post[i];
        done[p.vars[i]] = 1;
      }
      for (std::size_t e = 0; e < nv; ++e)
        if (p.fixed[e] >= 0)
          next[e] += p.weight * p.fixed[e];
        else if (!done[e])
          next[e] += p.weight * alpha[e];
    }
    for (auto& v : next) v /= states.total;
    return next;
  };
  const auto fp = detail::rate_fixed_point(std::vector<double>(nv, opt.initial_alpha), map, opt);
  EstimateReport rep = detail::finish_bp_report(fg.edge_ids, fp, "loopy");
  if (inner_failures) {
    rep.diagnostics.converged = false;
    rep.diagnostics.notes.push_back(std::to_string(inner_failures) + " message-passing runs hit the iteration cap");
  }
  if (contradictions)
    rep.diagnostics.notes.push_back(std::to_string(contradictions) + " failed paths contradicted by worked paths");
  rep.intermediates["patterns"] = static_cast<double>(patterns.size());
  rep.intermediates["message_sweeps"] = static_cast<double>(inner_total);
  return rep;
}

/// Whether the exact engine applies: the network is a tree (no undirected
/// cycle), sources have no in-edges and there are few enough sources.
inline bool tree_engine_applicable(const Configuration& cfg, std::string* why = nullptr) {
  const Topology& t = cfg.topology;
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (t.edge_count() + 1 != t.node_count() || !is_connected(t)) return fail("network is not a tree");
  if (cfg.sources.size() > kTreeEngineMaxSources) return fail("too many sources for the exact engine");
  for (auto s : cfg.sources)
    if (t.in_degree(s) != 0) return fail("a source has incoming edges");
  if (!is_acyclic(t)) return fail("orientation has a cycle");
  return true;
}

/// Belief propagation on a configuration. On tree networks the link/path
/// factor graph is loopy (failed paths share upstream links), so by default
/// the same posteriors are computed exactly by sum-product on the cycle-free
/// graph of per-node states; other networks use the loopy engine.
inline EstimateReport bp_estimate(const Configuration& cfg, const PathSet& ps, const PathStateHistogram& states,
                                  const BpOptions& opt = {}) {
  detail::check_bp_options(opt);
  std::string why;
  const bool exact_ok = tree_engine_applicable(cfg, &why);
  BpEngine engine = opt.engine;
  if (engine == BpEngine::automatic) engine = exact_ok ? BpEngine::tree_exact : BpEngine::loopy;
  if (engine == BpEngine::loopy) return bp_estimate(build_factor_graph(cfg, ps), states, opt);
  if (!exact_ok) throw DomainError("exact BP engine not applicable: " + why);
  if (states.paths != ps.paths.size()) throw DomainError("path states do not match the path set");
  if (states.total <= 0) throw DomainError("no path-state observations");

  const Topology& t = cfg.topology;
  const std::size_t m = t.edge_count();
  std::vector<detail::TreePattern> patterns;
  for (const auto& [s, w] : states.counts) {
    detail::TreePattern p{w, std::vector<std::int32_t>(m, -1)};
    for (auto r : cfg.receivers)
      for (auto e : t.in_edges(r)) p.seen[e] = 0;
    for (std::size_t i = 0; i < ps.paths.size(); ++i)
      if (s[i]) p.seen[ps.paths[i].last_edge()] |= std::int32_t{1} << cfg.source_position(ps.paths[i].source);
    patterns.push_back(std::move(p));
  }
  detail::TreeMessagePlan plan(cfg);
  std::vector<double> post;
  auto map = [&](const std::vector<double>& alpha) {
    std::vector<double> next(m, 0.0);
    for (const auto& p : patterns) {
      plan.posterior(p, alpha, post);
      for (std::size_t e = 0; e < m; ++e) next[e] += p.weight * post[e];
    }
    for (auto& v : next) v /= states.total;
    return next;
  };
  const auto fp = detail::rate_fixed_point(std::vector<double>(m, opt.initial_alpha), map, opt);
  std::vector<std::string> ids;
  for (const auto& e : t.edges()) ids.push_back(e.id);
  EstimateReport rep = detail::finish_bp_report(ids, fp, "tree_exact");
  rep.intermediates["patterns"] = static_cast<double>(patterns.size());
  return rep;
}

}  // namespace nctomo
