#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "nctomo/code.hpp"
#include "nctomo/random.hpp"
#include "nctomo/topology.hpp"

namespace nctomo {

// ---------------------------------------------------------------- loss model

/// Per-edge success probabilities, indexed like the topology's edges.
struct LossModel {
  std::vector<double> alpha;

  static LossModel uniform(std::size_t edges, double a) {
    LossModel m{std::vector<double>(edges, a)};
    m.validate();
    return m;
  }

  void validate() const {
    for (std::size_t e = 0; e < alpha.size(); ++e)
      if (!(alpha[e] > 0.0 && alpha[e] <= 1.0))
        throw DomainError("success probability of edge #" + std::to_string(e) + " must lie in (0, 1]");
  }
};

/// `<edge_id> <alpha>` lines; every edge of the topology must be listed once.
inline LossModel parse_loss_model(std::istream& in, const Topology& t) {
  LossModel m{std::vector<double>(t.edge_count(), std::nan(""))};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ss(line);
    std::string id, value, extra;
    if (!(ss >> id)) continue;
    if (!(ss >> value) || (ss >> extra)) throw ParseError(lineno, "expected '<edge_id> <alpha>'");
    auto e = t.find_edge(id);
    if (!e) throw ParseError(lineno, "unknown edge '" + id + "'");
    if (!std::isnan(m.alpha[*e])) throw ParseError(lineno, "edge '" + id + "' listed twice");
    try {
      std::size_t used = 0;
      m.alpha[*e] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad probability '" + value + "'");
    }
  }
  for (std::size_t e = 0; e < t.edge_count(); ++e)
    if (std::isnan(m.alpha[e])) throw DomainError("loss model misses edge '" + t.edge(e).id + "'");
  m.validate();
  return m;
}

inline LossModel read_loss_model_file(const std::string& path, const Topology& t) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read loss model file '" + path + "'");
  return parse_loss_model(in, t);
}

using LinkStates = std::vector<std::uint8_t>;  // 1 = up

/// Edge e is up iff U(seed, experiment, e) < alpha_e; a pure function of its arguments.
inline LinkStates sample_link_states(const LossModel& m, std::uint64_t seed, std::uint64_t experiment) {
  LinkStates s(m.alpha.size());
  for (std::size_t e = 0; e < s.size(); ++e) s[e] = to_unit(counter_hash(seed, experiment, e)) < m.alpha[e];
  return s;
}

// ---------------------------------------------------------------- outcomes

/// Receiver observation slots: one per (receiver, incoming edge), each holding
/// M field elements (one coordinate per source).
struct ObservationLayout {
  std::size_t sources = 0;
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (receiver node, in-edge)

  explicit ObservationLayout(const Configuration& cfg) : sources(cfg.sources.size()) {
    for (auto r : cfg.receivers)
      for (auto e : cfg.topology.in_edges(r)) slots.emplace_back(r, e);
  }
  std::size_t width() const noexcept { return slots.size() * sources; }
};

/// Flattened observation: slot-major, `sources` coordinates per slot. Zero means absent.
using Outcome = std::vector<std::uint32_t>;

/// Outcome -> count (or probability mass). Weights may be fractional.
struct OutcomeHistogram {
  std::map<Outcome, double> counts;
  double total = 0;

  void add(const Outcome& x, double w = 1.0) {
    counts[x] += w;
    total += w;
  }
  void merge(const OutcomeHistogram& o) {
    for (const auto& [x, w] : o.counts) counts[x] += w;
    total += o.total;
  }
  double probability(const Outcome& x) const {
    auto it = counts.find(x);
    return it == counts.end() || total <= 0 ? 0.0 : it->second / total;
  }
};

/// Probe propagation for a fixed configuration and code (topological order precomputed).
class Propagator {
 public:
  Propagator(const Configuration& cfg, const CodeAssignment& code) : cfg_(&cfg), code_(&code), layout_(cfg) {
    auto order = topological_order(cfg.topology);
    if (!order) throw DomainError("cycle detected: propagation needs a DAG");
    order_ = std::move(*order);
    if (code.coefficients.size() != cfg.topology.edge_count())
      throw DomainError("code assignment does not match the configuration");
    source_pos_.assign(cfg.topology.node_count(), -1);
    for (std::size_t i = 0; i < cfg.sources.size(); ++i) source_pos_[cfg.sources[i]] = static_cast<int>(i);
  }

  const ObservationLayout& layout() const noexcept { return layout_; }

  Outcome operator()(const LinkStates& up) const {
    const Topology& t = cfg_->topology;
    const std::size_t m = layout_.sources;
    const auto& field = code_->field;
    std::vector<std::uint32_t> out(t.node_count() * m, 0);
    for (auto v : order_) {
      std::uint32_t* dst = &out[v * m];
      if (source_pos_[v] >= 0) {
        dst[source_pos_[v]] = 1;
        continue;
      }
      for (auto e : t.in_edges(v)) {
        if (!up[e]) continue;
        const std::uint32_t* src = &out[t.edge(e).tail * m];
        const std::uint32_t c = code_->coefficients[e];
        for (std::size_t j = 0; j < m; ++j) dst[j] ^= c == 1 ? src[j] : field.mul_unchecked(c, src[j]);
      }
    }
    Outcome x(layout_.width(), 0);
    for (std::size_t s = 0; s < layout_.slots.size(); ++s) {
      const std::size_t e = layout_.slots[s].second;
      if (!up[e]) continue;
      const std::uint32_t* src = &out[t.edge(e).tail * m];
      const std::uint32_t c = code_->coefficients[e];
      for (std::size_t j = 0; j < m; ++j) x[s * m + j] = c == 1 ? src[j] : field.mul_unchecked(c, src[j]);
    }
    return x;
  }

 private:
  const Configuration* cfg_;
  const CodeAssignment* code_;
  ObservationLayout layout_;
  std::vector<std::size_t> order_;
  std::vector<int> source_pos_;
};

inline Outcome propagate(const Configuration& cfg, const CodeAssignment& code, const LinkStates& up) {
  return Propagator(cfg, code)(up);
}

/// n independent experiments; shards run on `workers` threads and merge by addition.
inline OutcomeHistogram run_experiments(const Configuration& cfg, const CodeAssignment& code, const LossModel& model,
                                        std::uint64_t n, std::uint64_t seed, unsigned workers = 1) {
  if (n == 0) throw DomainError("number of experiments must be at least 1");
  model.validate();
  if (model.alpha.size() != cfg.topology.edge_count()) throw DomainError("loss model does not match the topology");
  const Propagator prop(cfg, code);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(n, 64))));
  std::vector<OutcomeHistogram> shards(workers);
  auto work = [&](unsigned w) {
    const std::uint64_t lo = n * w / workers, hi = n * (w + 1) / workers;
    for (std::uint64_t i = lo; i < hi; ++i) shards[w].add(prop(sample_link_states(model, seed, i)));
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (unsigned w = 1; w < workers; ++w) shards[0].merge(shards[w]);
  return std::move(shards[0]);
}

inline constexpr std::size_t kExactEdgeLimit = 25;

/// Brute-force distribution over all 2^|E| link-state vectors. Accepts any
/// real alpha (no range check) so that finite differences may step past 1.
inline OutcomeHistogram exact_distribution(const Configuration& cfg, const CodeAssignment& code,
                                           const std::vector<double>& alpha) {
  const std::size_t m = cfg.topology.edge_count();
  if (m > kExactEdgeLimit)
    throw CapacityError("exact enumeration limited to " + std::to_string(kExactEdgeLimit) + " edges, got " +
                        std::to_string(m));
  if (alpha.size() != m) throw DomainError("loss model does not match the topology");
  const Propagator prop(cfg, code);
  OutcomeHistogram h;
  LinkStates up(m);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    double p = 1.0;
    for (std::size_t e = 0; e < m; ++e) {
      up[e] = (mask >> e) & 1;
      p *= up[e] ? alpha[e] : 1.0 - alpha[e];
    }
    h.counts[prop(up)] += p;
  }
  h.total = 1.0;
  return h;
}

inline OutcomeHistogram exact_distribution(const Configuration& cfg, const CodeAssignment& code,
                                           const LossModel& model) {
  model.validate();
  return exact_distribution(cfg, code, model.alpha);
}

// ---------------------------------------------------------------- duality

/// Outcome map between a configuration and its dual, built from the link
/// states each outcome class contains. Throws if the two configurations do
/// not partition the link-state space the same way.
inline std::map<Outcome, Outcome> dual_outcome_map(const Configuration& cfg, const CodeAssignment& code,
                                                   const CodeAssignment& dual_code) {
  const std::size_t m = cfg.topology.edge_count();
  if (m > kExactEdgeLimit) throw CapacityError("dual outcome map needs exhaustive enumeration");
  const Configuration d = dual(cfg);
  const Propagator p1(cfg, code), p2(d, dual_code);
  std::map<Outcome, Outcome> fwd, back;
  LinkStates up(m);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    for (std::size_t e = 0; e < m; ++e) up[e] = (mask >> e) & 1;
    Outcome x = p1(up), y = p2(up);
    auto [it, fresh] = fwd.emplace(x, y);
    auto [jt, fresh2] = back.emplace(y, x);
    if (it->second != y || jt->second != x)
      throw DomainError("configuration and dual do not induce the same outcome partition");
  }
  return fwd;
}

inline OutcomeHistogram map_histogram(const OutcomeHistogram& h, const std::map<Outcome, Outcome>& f) {
  OutcomeHistogram r;
  for (const auto& [x, w] : h.counts) r.counts[f.at(x)] += w;
  r.total = h.total;
  return r;
}

// ---------------------------------------------------------------- export

/// Canonical key: receivers sorted by id, `id=hex.hex...` per slot, joined by ';'.
inline std::string outcome_key(const Configuration& cfg, const ObservationLayout& layout, const Outcome& x) {
  std::vector<std::pair<std::string, std::string>> parts;
  for (std::size_t s = 0; s < layout.slots.size(); ++s) {
    const auto [r, e] = layout.slots[s];
    std::string v = cfg.topology.node_name(r);
    if (cfg.topology.in_degree(r) > 1) v += "/" + cfg.topology.edge(e).id;
    std::string payload;
    for (std::size_t j = 0; j < layout.sources; ++j) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%s%x", j ? "." : "", x[s * layout.sources + j]);
      payload += buf;
    }
    parts.emplace_back(std::move(v), std::move(payload));
  }
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (const auto& [k, p] : parts) key += (key.empty() ? "" : ";") + k + "=" + p;
  return key;
}

inline void write_histogram_csv(std::ostream& out, const Configuration& cfg, const OutcomeHistogram& h) {
  const ObservationLayout layout(cfg);
  std::vector<std::pair<std::string, double>> rows;
  for (const auto& [x, w] : h.counts) rows.emplace_back(outcome_key(cfg, layout, x), w);
  std::sort(rows.begin(), rows.end());
  out << "outcome,count\n";
  for (const auto& [k, w] : rows) out << k << ',' << w << '\n';
}

}  // namespace nctomo
