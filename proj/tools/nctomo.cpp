// Command-line driver: validate, orient, run, codecheck, lp.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nctomo/nctomo.hpp"

namespace fs = std::filesystem;
using namespace nctomo;

namespace {

std::string g_invocation;

std::string quote_arg(const std::string& a) {
  if (!a.empty() && a.find_first_of(" \t\"'\\$") == std::string::npos) return a;
  std::string q = "'";
  for (char c : a) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

std::string header_text() { return std::string("nctomo ") + kVersion + "; invocation: " + g_invocation; }

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
  return out;
}

bool is_builtin_name(const std::string& spec) { return !fs::exists(spec) && builtin(spec).has_value(); }

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& file, bool directed, const std::vector<std::string>& sources,
                 const std::vector<std::string>& receivers) {
  const Topology t = load_topology(file);
  ValidationOptions opt;
  opt.directed = directed;
  opt.sources = sources;
  opt.receivers = receivers;
  const auto rep = validate_logical(t, opt);
  for (const auto& v : rep.violations) std::cout << "violation: node " << v.node << " [" << v.rule << "] " << v.detail << '\n';
  std::cout << (rep.ok() ? "ok" : "invalid") << ": " << t.node_count() << " nodes, " << t.edge_count() << " edges, "
            << rep.violations.size() << " violations\n";
  return rep.ok() ? 0 : 1;
}

// ---------------------------------------------------------------- orient

void write_stats_header(std::ostream& os) {
  os << "sources,receivers,coding_points,links_per_path,paths_per_link,path_count,edge_disjoint_paths\n";
}

void write_stats_row(std::ostream& os, const std::vector<std::string>& sources, const OrientationStats& s) {
  std::string joined;
  for (std::size_t i = 0; i < sources.size(); ++i) joined += (i ? ";" : "") + sources[i];
  os << joined << ',' << s.receivers << ',' << s.coding_points << ',' << format_number(s.links_per_path) << ','
     << format_number(s.paths_per_link) << ',' << format_number(s.path_count) << ',' << s.edge_disjoint_paths << '\n';
}

int cmd_orient(const std::string& file, const std::vector<std::string>& sources, std::uint64_t seed,
               const std::string& out_dir, const std::string& sweep, const std::string& candidates) {
  const Topology g = load_topology(file);
  if (!is_connected(g)) throw DomainError("graph is disconnected");
  if (sweep == "none") {
    if (sources.empty()) throw UsageError("--sources is required unless --sweep is given");
    const auto res = orient(g, sources, seed);
    auto topo = open_output(out_dir, "oriented.txt");
    write_topology(topo, res.config.topology,
                   {header_text(), "sources: " + [&] {
                      std::string s;
                      for (const auto& x : res.config.source_names()) s += x + " ";
                      return s;
                    }() + "receivers: " + [&] {
                      std::string s;
                      for (const auto& x : res.config.receiver_names()) s += x + " ";
                      return s;
                    }()});
    auto stats = open_output(out_dir, "stats.csv");
    stats << "# " << header_text() << '\n';
    write_stats_header(stats);
    write_stats_row(stats, sources, res.stats);
    write_stats_header(std::cout);
    write_stats_row(std::cout, sources, res.stats);
    return 0;
  }
  if (sweep != "single" && sweep != "pairs") throw UsageError("--sweep must be none, single or pairs");
  std::vector<std::string> cand;
  for (std::size_t v = 0; v < g.node_count(); ++v)
    if (candidates == "all" || g.is_leaf(v)) cand.push_back(g.node_name(v));
  auto stats = open_output(out_dir, "stats.csv");
  stats << "# " << header_text() << '\n';
  write_stats_header(stats);
  std::size_t rows = 0;
  auto one = [&](const std::vector<std::string>& s) {
    write_stats_row(stats, s, orient(g, s, seed).stats);
    ++rows;
  };
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (sweep == "single") {
      one({cand[i]});
      continue;
    }
    for (std::size_t k = i + 1; k < cand.size(); ++k) one({cand[i], cand[k]});
  }
  std::cout << rows << " placements written to " << (fs::path(out_dir) / "stats.csv").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- run

int cmd_run(const ExperimentConfig& c) {
  const auto batch = run_batch(c);
  auto est = open_output(c.out_dir, "estimates.csv");
  est << "# " << header_text() << '\n';
  write_estimates_csv(est, batch);
  auto sum = open_output(c.out_dir, "summary.json");
  nlohmann::ordered_json j;
  j["header"] = header_text();
  const auto summary = summary_json(c, batch);
  for (const auto& [k, v] : summary.items()) j[k] = v;
  sum << j.dump(2) << '\n';
  std::cout << "estimator " << to_string(c.estimator) << ", " << c.trials << " trials of " << c.n << " probes\n";
  if (batch.metrics.ent_is_minus_infinity)
    std::cout << "ENT -inf (some edge estimated exactly)\n";
  else
    std::cout << "ENT " << batch.metrics.ent << "  ENT_av " << batch.metrics.ent_av << '\n';
  std::cout << "results in " << c.out_dir << '\n';
  return 0;
}

// ---------------------------------------------------------------- codecheck

Configuration codecheck_configuration(const std::string& file, bool directed, const std::vector<std::string>& sources,
                                      const std::vector<std::string>& receivers, std::uint64_t seed) {
  if (is_builtin_name(file) && !directed) {
    const auto b = *builtin(file);
    if (sources.empty() || sources == b.sources) return b.configuration();
  }
  Topology t = load_topology(file);
  if (directed) {
    const auto s = sources.empty() ? default_sources(t) : sources;
    return receivers.empty() ? make_configuration(std::move(t), s) : make_configuration(std::move(t), s, receivers);
  }
  if (sources.empty()) throw UsageError("--sources is required to orient the graph");
  return orient(t, sources, seed).config;
}

int cmd_codecheck(const std::string& file, bool directed, const std::vector<std::string>& sources,
                  const std::vector<std::string>& receivers, const std::vector<unsigned>& ks, std::size_t seeds,
                  std::uint64_t seed, std::size_t attempts, std::size_t cap, const std::string& out_dir) {
  if (ks.empty()) throw UsageError("give at least one field size with --k");
  if (seeds == 0) throw UsageError("--seeds must be positive");
  for (auto k : ks)
    if (k < 1 || k > 16) throw UsageError("field sizes must lie in 1..16");
  const Configuration cfg = codecheck_configuration(file, directed, sources, receivers, seed);
  const PathSet all = enumerate_paths(cfg);
  PathSet usable = all;
  usable.triplets.clear();
  std::vector<char> skipped(all.triplets.size(), 0);
  for (std::size_t i = 0; i < all.triplets.size(); ++i) {
    if (all.triplets[i].paths.size() > cap)
      skipped[i] = 1;
    else
      usable.triplets.push_back(all.triplets[i]);
  }
  const Topology& t = cfg.topology;
  auto name = [&](const Triplet& tr) {
    return t.node_name(tr.source) + ">" + t.node_name(tr.receiver) + "@" + t.edge(tr.in_edge).id;
  };
  auto csv = open_output(out_dir, "codecheck.csv");
  csv << "# " << header_text() << '\n';
  csv << "k,triplet,paths,mean_ratio,min_ratio,seeds,skipped\n";
  std::cout << "k,mean_ratio,min_ratio,all_complete_fraction,mean_attempts\n";
  for (auto k : ks) {
    const GaloisField field(k);
    std::vector<double> sum(usable.triplets.size(), 0.0), mn(usable.triplets.size(), 1.0);
    std::size_t complete = 0, total_attempts = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto res = assign_coefficients(cfg, usable, field, counter_hash(seed, k, s), attempts, cap);
      complete += res.complete;
      total_attempts += res.attempts;
      for (std::size_t i = 0; i < usable.triplets.size(); ++i) {
        sum[i] += res.table.triplets[i].ratio;
        mn[i] = std::min(mn[i], res.table.triplets[i].ratio);
      }
    }
    double overall = 0, overall_min = 1;
    std::size_t u = 0;
    for (std::size_t i = 0; i < all.triplets.size(); ++i) {
      const auto& tr = all.triplets[i];
      if (skipped[i]) {
        csv << k << ',' << name(tr) << ',' << tr.paths.size() << ",,," << seeds << ",1\n";
        continue;
      }
      const double mean = sum[u] / static_cast<double>(seeds);
      overall += mean;
      overall_min = std::min(overall_min, mn[u]);
      csv << k << ',' << name(tr) << ',' << tr.paths.size() << ',' << format_number(mean) << ','
          << format_number(mn[u]) << ',' << seeds << ",0\n";
      ++u;
    }
    if (u) overall /= static_cast<double>(u);
    std::cout << k << ',' << format_number(u ? overall : 1.0) << ',' << format_number(overall_min) << ','
              << format_number(static_cast<double>(complete) / static_cast<double>(seeds)) << ','
              << format_number(static_cast<double>(total_attempts) / static_cast<double>(seeds)) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- lp

int cmd_lp(const std::string& file, const std::vector<std::string>& sources, const std::vector<std::string>& receivers,
           const std::vector<std::string>& targets, double rho, const std::vector<std::string>& cost_specs,
           const std::string& out_dir) {
  Configuration cfg;
  if (is_builtin_name(file)) {
    const auto b = *builtin(file);
    cfg = make_configuration(b.topology, sources.empty() ? b.sources : sources,
                             receivers.empty() ? b.receivers : receivers);
  } else {
    Topology t = read_topology_file(file);
    const auto s = sources.empty() ? default_sources(t) : sources;
    cfg = receivers.empty() ? make_configuration(std::move(t), s) : make_configuration(std::move(t), s, receivers);
  }
  const Topology& t = cfg.topology;
  for (const auto& id : targets)
    if (!t.find_edge(id)) throw UsageError("unknown target edge '" + id + "'");
  if (!(rho > 0)) throw UsageError("--rho must be positive");
  std::vector<double> costs(t.edge_count(), 1.0);
  for (const auto& spec : cost_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--cost expects EDGE=VALUE, got '" + spec + "'");
    const auto e = t.find_edge(spec.substr(0, eq));
    if (!e) throw UsageError("unknown edge in --cost '" + spec + "'");
    try {
      costs[*e] = std::stod(spec.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("bad cost value in '" + spec + "'");
    }
  }
  const auto r = build_min_cost_lp(cfg, targets, rho, costs);
  auto lp = open_output(out_dir, "model.lp");
  lp << "\\ " << header_text() << '\n';
  serialize_lp(lp, r.model);
  const auto sol = solve_lp(r.model);
  if (!sol.optimal()) {
    std::cout << "status " << to_string(sol.status) << '\n';
    if (sol.status == LpStatus::infeasible) {
      std::cout << "phase-1 infeasibility " << sol.infeasibility << "; unsatisfiable rows:";
      for (const auto& row : sol.certificate) std::cout << ' ' << row;
      std::cout << '\n';
    }
    return 1;
  }
  auto flows = open_output(out_dir, "flows.csv");
  flows << "# " << header_text() << '\n';
  write_flow_csv(flows, r, sol);
  std::cout << "status optimal\nobjective " << format_number(sol.objective) << '\n';
  std::cout << "variables " << r.model.variable_count() << ", rows " << r.model.rows.size() << ", pivots "
            << sol.pivots << '\n';
  if (!targets.empty()) {
    const auto support = flow_support(cfg, r, sol);
    for (const auto& id : targets) {
      const auto e = support.topology.find_edge(id);
      const bool ok = e && check_link_identifiable(support, *e).identifiable;
      std::cout << "target " << id << ": " << (ok ? "identifiable" : "not identifiable") << " on the flow support\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) g_invocation += (i ? " " : "") + quote_arg(i ? argv[i] : "nctomo");

  CLI::App app{"Loss tomography with network-coded probes"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // validate
  auto* v = app.add_subcommand("validate", "check the degree rules of a logical topology");
  std::string v_file;
  bool v_directed = false;
  std::vector<std::string> v_sources, v_receivers;
  v->add_option("topology", v_file, "topology file or built-in name")->required();
  v->add_flag("--directed", v_directed, "also check in/out-degree rules");
  v->add_option("--sources", v_sources, "nodes allowed to lack in-edges")->delimiter(',');
  v->add_option("--receivers", v_receivers, "nodes allowed to lack out-edges")->delimiter(',');

  // orient
  auto* o = app.add_subcommand("orient", "orient a logical graph from its sources");
  std::string o_file, o_out = "out", o_sweep = "none", o_cand = "all";
  std::vector<std::string> o_sources;
  std::uint64_t o_seed = 1;
  o->add_option("topology", o_file, "topology file or built-in name")->required();
  o->add_option("--sources", o_sources, "source nodes")->delimiter(',');
  o->add_option("--seed", o_seed, "tie-break seed");
  o->add_option("--out-dir", o_out, "output directory");
  o->add_option("--sweep", o_sweep, "none | single | pairs: one stats row per source placement");
  o->add_option("--candidates", o_cand, "all | leaves: nodes tried by --sweep");

  // run
  auto* r = app.add_subcommand("run", "simulate probes and estimate link rates");
  std::string r_config, r_mode, r_estimator, r_engine;
  ExperimentConfig rc;
  double r_alpha = 0;
  r->add_option("--config", r_config, "JSON config file; flags override its fields");
  r->add_option("--topology", rc.topology, "topology file or built-in name (tree5, tree9, tree45)");
  r->add_flag("--orient", rc.orient, "orient the topology file from the sources");
  r->add_option("--mode", r_mode, "tree-xor | dag-coded");
  r->add_option("--sources", rc.sources, "source nodes")->delimiter(',');
  r->add_option("--receivers", rc.receivers, "receiver nodes")->delimiter(',');
  r->add_option("--alpha", r_alpha, "uniform link success rate");
  r->add_option("--loss-model", rc.loss_model, "file of '<edge> <alpha>' lines");
  r->add_option("--estimator", r_estimator, "mle | subtree | minc-like | bp");
  r->add_option("--n", rc.n, "probes per trial");
  r->add_option("--trials", rc.trials, "Monte-Carlo trials");
  r->add_option("--seed", rc.seed, "master seed");
  r->add_option("--field-k", rc.field_k, "GF(2^k) for dag-coded mode");
  r->add_option("--code-attempts", rc.code_attempts, "coefficient draws in dag-coded mode");
  r->add_option("--kappa", rc.kappa, "BP message scaling");
  r->add_option("--bp-iterations", rc.bp_iterations, "BP message sweeps");
  r->add_option("--bp-engine", r_engine, "automatic | loopy | tree_exact");
  r->add_option("--subtree-p", rc.subtree_p, "subtree heuristic split weight");
  r->add_option("--out-dir", rc.out_dir, "output directory");
  r->add_option("--workers", rc.workers, "parallel trial workers");

  // codecheck
  auto* c = app.add_subcommand("codecheck", "success ratio of random coefficients per field size");
  std::string c_file, c_out = "out";
  bool c_directed = false;
  std::vector<std::string> c_sources, c_receivers;
  std::vector<unsigned> c_k;
  std::size_t c_seeds = 5, c_attempts = 1, c_cap = kDefaultPathCap;
  std::uint64_t c_seed = 1;
  c->add_option("topology", c_file, "topology file or built-in name")->required();
  c->add_flag("--directed", c_directed, "use the file's orientation instead of orienting");
  c->add_option("--sources", c_sources, "source nodes")->delimiter(',');
  c->add_option("--receivers", c_receivers, "receiver nodes (with --directed)")->delimiter(',');
  c->add_option("--k", c_k, "field sizes, e.g. 2,4,6")->delimiter(',')->required();
  c->add_option("--seeds", c_seeds, "runs averaged per field size");
  c->add_option("--seed", c_seed, "master seed");
  c->add_option("--attempts", c_attempts, "coefficient draws per run");
  c->add_option("--cap", c_cap, "largest triplet checked exhaustively");
  c->add_option("--out-dir", c_out, "output directory");

  // lp
  auto* l = app.add_subcommand("lp", "minimum-cost probe routing");
  std::string l_file, l_out = "out";
  std::vector<std::string> l_sources, l_receivers, l_targets, l_costs;
  double l_rho = 1.0;
  l->add_option("topology", l_file, "directed topology file or built-in name")->required();
  l->add_option("--sources", l_sources, "source nodes")->delimiter(',');
  l->add_option("--receivers", l_receivers, "receiver nodes")->delimiter(',');
  l->add_option("--targets", l_targets, "edges that must be identifiable")->delimiter(',');
  l->add_option("--rho", l_rho, "probe rate");
  l->add_option("--cost", l_costs, "EDGE=VALUE (repeatable; default cost 1)");
  l->add_option("--out-dir", l_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (v->parsed()) return cmd_validate(v_file, v_directed, v_sources, v_receivers);
    if (o->parsed()) return cmd_orient(o_file, o_sources, o_seed, o_out, o_sweep, o_cand);
    if (r->parsed()) {
      ExperimentConfig base;
      if (!r_config.empty()) {
        std::ifstream in(r_config);
        if (!in) throw UsageError("cannot read config '" + r_config + "'");
        nlohmann::json j;
        try {
          in >> j;
        } catch (const nlohmann::json::exception& e) {
          throw UsageError(std::string("config is not valid JSON: ") + e.what());
        }
        base = config_from_json(j);
      }
      // flags given on the command line override the config file
      auto given = [&](const char* name) { return r->get_option(name)->count() > 0; };
      if (given("--topology")) base.topology = rc.topology;
      if (rc.orient) base.orient = true;
      if (given("--mode")) base.mode = parse_mode(r_mode);
      if (given("--sources")) base.sources = rc.sources;
      if (given("--receivers")) base.receivers = rc.receivers;
      if (given("--alpha")) base.alpha = r_alpha;
      if (given("--loss-model")) base.loss_model = rc.loss_model;
      if (given("--estimator")) base.estimator = parse_estimator(r_estimator);
      if (given("--n")) base.n = rc.n;
      if (given("--trials")) base.trials = rc.trials;
      if (given("--seed")) base.seed = rc.seed;
      if (given("--field-k")) base.field_k = rc.field_k;
      if (given("--code-attempts")) base.code_attempts = rc.code_attempts;
      if (given("--kappa")) base.kappa = rc.kappa;
      if (given("--bp-iterations")) base.bp_iterations = rc.bp_iterations;
      if (given("--bp-engine")) base.bp_engine = parse_bp_engine(r_engine);
      if (given("--subtree-p")) base.subtree_p = rc.subtree_p;
      if (given("--out-dir")) base.out_dir = rc.out_dir;
      if (given("--workers")) base.workers = rc.workers;
      return cmd_run(base);
    }
    if (c->parsed())
      return cmd_codecheck(c_file, c_directed, c_sources, c_receivers, c_k, c_seeds, c_seed, c_attempts, c_cap, c_out);
    if (l->parsed()) return cmd_lp(l_file, l_sources, l_receivers, l_targets, l_rho, l_costs, l_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
