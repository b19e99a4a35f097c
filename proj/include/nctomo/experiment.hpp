#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nctomo/bp.hpp"
#include "nctomo/builtin.hpp"
#include "nctomo/code.hpp"
#include "nctomo/heuristics.hpp"
#include "nctomo/lp.hpp"
#include "nctomo/metrics.hpp"
#include "nctomo/mle.hpp"
#include "nctomo/orient.hpp"
#include "nctomo/simulate.hpp"

namespace nctomo {

inline constexpr const char* kVersion = "0.1.0";

/// Bad combination of settings (as opposed to a property of the network).
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class ProbeMode { tree_xor, dag_coded };
enum class Estimator { mle, subtree, minc_like, bp };

inline const char* to_string(ProbeMode m) { return m == ProbeMode::tree_xor ? "tree-xor" : "dag-coded"; }

inline const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::mle: return "mle";
    case Estimator::subtree: return "subtree";
    case Estimator::minc_like: return "minc-like";
    default: return "bp";
  }
}

inline ProbeMode parse_mode(const std::string& s) {
  if (s == "tree-xor") return ProbeMode::tree_xor;
  if (s == "dag-coded") return ProbeMode::dag_coded;
  throw UsageError("unknown mode '" + s + "' (tree-xor | dag-coded)");
}

inline Estimator parse_estimator(const std::string& s) {
  if (s == "mle") return Estimator::mle;
  if (s == "subtree") return Estimator::subtree;
  if (s == "minc-like") return Estimator::minc_like;
  if (s == "bp") return Estimator::bp;
  throw UsageError("unknown estimator '" + s + "' (mle | subtree | minc-like | bp)");
}

inline BpEngine parse_bp_engine(const std::string& s) {
  if (s == "automatic") return BpEngine::automatic;
  if (s == "loopy") return BpEngine::loopy;
  if (s == "tree_exact") return BpEngine::tree_exact;
  throw UsageError("unknown BP engine '" + s + "' (automatic | loopy | tree_exact)");
}

struct ExperimentConfig {
  std::string topology = "tree5";  // file path or built-in name
  bool orient = false;             // treat the file as undirected and orient it from the sources
  ProbeMode mode = ProbeMode::tree_xor;
  std::vector<std::string> sources;    // empty: built-in default / nodes without in-edges
  std::vector<std::string> receivers;  // empty: derived
  std::optional<double> alpha = 0.8;   // uniform rate
  std::string loss_model;              // file; overrides alpha
  Estimator estimator = Estimator::mle;
  std::size_t n = 1000;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  unsigned field_k = 8;
  std::size_t code_attempts = 5;
  double kappa = 0.9;
  std::size_t bp_iterations = 100;
  BpEngine bp_engine = BpEngine::automatic;
  double subtree_p = 0.5;
  std::string out_dir = "out";
  unsigned workers = 1;
};

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["topology"] = c.topology;
  j["orient"] = c.orient;
  j["mode"] = to_string(c.mode);
  j["sources"] = c.sources;
  j["receivers"] = c.receivers;
  if (c.loss_model.empty() && c.alpha) j["alpha"] = *c.alpha;
  if (!c.loss_model.empty()) j["loss_model"] = c.loss_model;
  j["estimator"] = to_string(c.estimator);
  j["n"] = c.n;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["field_k"] = c.field_k;
  j["code_attempts"] = c.code_attempts;
  j["kappa"] = c.kappa;
  j["bp_iterations"] = c.bp_iterations;
  j["bp_engine"] = to_string(c.bp_engine);
  j["subtree_p"] = c.subtree_p;
  j["out_dir"] = c.out_dir;
  j["workers"] = c.workers;
  return j;
}

/// Reads the JSON-shaped config; unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c = {}) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "topology") c.topology = v.get<std::string>();
      else if (key == "orient") c.orient = v.get<bool>();
      else if (key == "mode") c.mode = parse_mode(v.get<std::string>());
      else if (key == "sources") c.sources = v.get<std::vector<std::string>>();
      else if (key == "receivers") c.receivers = v.get<std::vector<std::string>>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "loss_model") c.loss_model = v.get<std::string>();
      else if (key == "estimator") c.estimator = parse_estimator(v.get<std::string>());
      else if (key == "n") c.n = v.get<std::size_t>();
      else if (key == "trials") c.trials = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "field_k") c.field_k = v.get<unsigned>();
      else if (key == "code_attempts") c.code_attempts = v.get<std::size_t>();
      else if (key == "kappa") c.kappa = v.get<double>();
      else if (key == "bp_iterations") c.bp_iterations = v.get<std::size_t>();
      else if (key == "bp_engine") c.bp_engine = parse_bp_engine(v.get<std::string>());
      else if (key == "subtree_p") c.subtree_p = v.get<double>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "workers") c.workers = v.get<unsigned>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  return c;
}

/// Mode/estimator compatibility and numeric ranges.
inline void validate_config(const ExperimentConfig& c) {
  if (c.n == 0) throw UsageError("n must be positive");
  if (c.trials == 0) throw UsageError("trials must be positive");
  if (c.workers == 0) throw UsageError("workers must be positive");
  if (c.mode == ProbeMode::dag_coded && c.estimator != Estimator::bp)
    throw UsageError(std::string("estimator ") + to_string(c.estimator) + " requires tree-xor mode");
  if (c.field_k < 1 || c.field_k > 16) throw UsageError("field_k must lie in 1..16");
  if (!(c.kappa > 0 && c.kappa <= 1)) throw UsageError("kappa must lie in (0, 1]");
  if (c.bp_iterations == 0) throw UsageError("bp_iterations must be positive");
  if (!(c.subtree_p >= 0 && c.subtree_p <= 1)) throw UsageError("subtree_p must lie in [0, 1]");
  if (c.loss_model.empty() && !(c.alpha && *c.alpha > 0 && *c.alpha <= 1))
    throw UsageError("alpha must lie in (0, 1] (or give a loss model file)");
}

/// Loads a built-in name or a topology file.
inline Topology load_topology(const std::string& spec) {
  if (!std::filesystem::exists(spec))
    if (auto b = builtin(spec)) return b->topology;
  return read_topology_file(spec);
}

/// Resolves topology, orientation, sources and receivers.
inline Configuration resolve_configuration(const ExperimentConfig& c) {
  const bool is_builtin = !std::filesystem::exists(c.topology) && builtin(c.topology).has_value();
  if (is_builtin) {
    const auto b = *builtin(c.topology);
    if (c.sources.empty() || c.sources == b.sources) {
      if (!c.receivers.empty()) return make_configuration(b.topology, b.sources, c.receivers);
      return b.configuration();
    }
    return orient(b.topology, c.sources, c.seed).config;
  }
  Topology t = read_topology_file(c.topology);
  if (c.orient) {
    if (c.sources.empty()) throw UsageError("orienting a logical graph needs sources");
    return orient(t, c.sources, c.seed).config;
  }
  const auto sources = c.sources.empty() ? default_sources(t) : c.sources;
  if (!c.receivers.empty()) return make_configuration(std::move(t), sources, c.receivers);
  return make_configuration(std::move(t), sources);
}

struct TrialResult {
  EstimateReport report;
  double seconds = 0;
};

struct BatchResult {
  Configuration config;
  LossModel model;
  CodeAssignment code;
  std::vector<TrialResult> trials;  // by trial index
  Metrics metrics;
  double seconds = 0;
  std::size_t code_attempts = 0;
  double code_min_ratio = 1;
};

namespace detail {

struct EstimationContext {
  const ExperimentConfig* settings;
  const Configuration* config;
  const CodeAssignment* code;
  const PathSet* paths = nullptr;
  const PathTable* table = nullptr;
  const SubtreePartition* partition = nullptr;
};

inline EstimateReport estimate_once(const EstimationContext& ctx, const OutcomeHistogram& h) {
  const auto& c = *ctx.settings;
  switch (c.estimator) {
    case Estimator::mle: return mle_tree(*ctx.config, h);
    case Estimator::subtree: return subtree_estimate(*ctx.config, *ctx.partition, h);
    case Estimator::minc_like: return minc_like_estimate(*ctx.config, h);
    default: {
      BpOptions opt;
      opt.kappa = c.kappa;
      opt.iterations = c.bp_iterations;
      opt.engine = c.bp_engine;
      const auto states = observe_path_states(*ctx.config, *ctx.paths, *ctx.table, h);
      return bp_estimate(*ctx.config, *ctx.paths, states, opt);
    }
  }
}

}  // namespace detail

/// Simulates and estimates every trial. Trial t uses the experiment seed
/// counter_hash(seed, t), so results do not depend on the worker count.
inline BatchResult run_batch(const ExperimentConfig& c) {
  validate_config(c);
  const auto start = std::chrono::steady_clock::now();
  BatchResult out;
  out.config = resolve_configuration(c);
  const Topology& t = out.config.topology;
  out.model = c.loss_model.empty() ? LossModel::uniform(t.edge_count(), *c.alpha) : read_loss_model_file(c.loss_model, t);

  std::optional<PathSet> ps;
  std::optional<PathTable> table;
  std::optional<SubtreePartition> part;
  if (c.mode == ProbeMode::tree_xor) {
    if (t.edge_count() + 1 != t.node_count()) throw DomainError("tree-xor mode needs a tree topology");
    out.code = CodeAssignment::xor_mode(t.edge_count());
  }
  if (c.estimator == Estimator::bp || c.mode == ProbeMode::dag_coded) ps = enumerate_paths(out.config);
  if (c.mode == ProbeMode::dag_coded) {
    const GaloisField field(c.field_k);
    auto res = assign_coefficients(out.config, *ps, field, counter_hash(c.seed, 0x636f6465), c.code_attempts);
    out.code = std::move(res.code);
    out.code_attempts = res.attempts;
    out.code_min_ratio = res.table.min_ratio();
    table = std::move(res.table);
  } else if (ps) {
    table = check_code(out.code, *ps);
  }
  if (c.estimator == Estimator::mle) analyze_tree_model(out.config);  // reject before simulating
  if (c.estimator == Estimator::subtree) part = subtree_decompose(out.config, c.subtree_p);

  detail::EstimationContext ctx{&c, &out.config, &out.code, ps ? &*ps : nullptr, table ? &*table : nullptr,
                                part ? &*part : nullptr};
  out.trials.resize(c.trials);
  auto run_trial = [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto h = run_experiments(out.config, out.code, out.model, c.n, counter_hash(c.seed, i));
    out.trials[i].report = detail::estimate_once(ctx, h);
    out.trials[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(c.workers, c.trials));
  if (workers <= 1) {
    for (std::size_t i = 0; i < c.trials; ++i) run_trial(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < c.trials; i += workers) run_trial(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::vector<EstimateReport> reports;
  for (const auto& tr : out.trials) reports.push_back(tr.report);
  out.metrics = metrics(out.model.alpha, reports);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// trial,edge,alpha,alpha_hat,raw,status
inline void write_estimates_csv(std::ostream& os, const BatchResult& b) {
  os << "trial,edge,alpha,alpha_hat,raw,status\n";
  for (std::size_t i = 0; i < b.trials.size(); ++i) {
    const auto& r = b.trials[i].report;
    for (std::size_t e = 0; e < r.size(); ++e)
      os << i << ',' << r.edge_ids[e] << ',' << format_number(b.model.alpha[e]) << ',' << format_number(r.alpha[e])
         << ',' << format_number(r.raw[e]) << ',' << to_string(r.status[e]) << '\n';
  }
}

inline nlohmann::ordered_json summary_json(const ExperimentConfig& c, const BatchResult& b) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(c);
  j["sources"] = b.config.source_names();
  j["receivers"] = b.config.receiver_names();
  if (c.mode == ProbeMode::dag_coded) {
    j["code"] = code_to_json(b.code, b.config.topology);
    j["code_attempts"] = b.code_attempts;
    j["code_min_ratio"] = b.code_min_ratio;
  }
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (std::size_t e = 0; e < b.model.alpha.size(); ++e)
    edges.push_back({{"edge", b.config.topology.edge(e).id}, {"alpha", b.model.alpha[e]}, {"mse", b.metrics.mse[e]}});
  j["edges"] = std::move(edges);
  j["ent"] = b.metrics.ent_is_minus_infinity ? nlohmann::ordered_json("-inf") : nlohmann::ordered_json(b.metrics.ent);
  j["ent_av"] =
      b.metrics.ent_is_minus_infinity ? nlohmann::ordered_json("-inf") : nlohmann::ordered_json(b.metrics.ent_av);
  std::size_t flagged = 0;
  for (const auto& tr : b.trials) flagged += tr.report.flagged();
  j["flagged_estimates"] = flagged;
  j["runtime_seconds"] = b.seconds;
  return j;
}

}  // namespace nctomo
