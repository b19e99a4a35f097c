#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "nctomo/topology.hpp"

namespace nctomo {

inline constexpr double kAlphaFloor = 1e-9;

enum class EdgeStatus { ok, clamped, degenerate };

inline const char* to_string(EdgeStatus s) {
  switch (s) {
    case EdgeStatus::clamped: return "clamped";
    case EdgeStatus::degenerate: return "degenerate";
    default: return "ok";
  }
}

struct Diagnostics {
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = true;
  std::vector<std::string> notes;
};

/// Per-edge estimates. `alpha` always lies in (0, 1]; out-of-range or undefined
/// raw values are clamped there and the edge is flagged, with `raw` kept.
struct EstimateReport {
  std::string estimator;
  std::vector<std::string> edge_ids;
  std::vector<double> alpha;
  std::vector<double> raw;
  std::vector<EdgeStatus> status;
  Diagnostics diagnostics;
  /// Named intermediates (gamma statistics, path probabilities...).
  std::map<std::string, double> intermediates;
  Eigen::MatrixXd fisher;          // empty when not computed
  Eigen::MatrixXd fisher_inverse;  // empty when not computed
  std::vector<double> ci_halfwidth;

  EstimateReport() = default;
  EstimateReport(std::string name, const Topology& t)
      : estimator(std::move(name)),
        alpha(t.edge_count(), 1.0),
        raw(t.edge_count(), 1.0),
        status(t.edge_count(), EdgeStatus::ok) {
    for (const auto& e : t.edges()) edge_ids.push_back(e.id);
  }

  std::size_t size() const noexcept { return alpha.size(); }

  /// Stores a raw estimate, clamping into (0, 1].
  void set(std::size_t e, double value, bool degenerate = false) {
    raw[e] = value;
    const double clamped = value > 1.0 ? 1.0 : (value >= kAlphaFloor ? value : kAlphaFloor);  // NaN -> floor
    alpha[e] = clamped;
    if (degenerate || !std::isfinite(value))
      status[e] = EdgeStatus::degenerate;
    else
      status[e] = clamped == value ? EdgeStatus::ok : EdgeStatus::clamped;
  }

  std::size_t flagged() const {
    std::size_t n = 0;
    for (auto s : status) n += s != EdgeStatus::ok;
    return n;
  }
};

inline nlohmann::ordered_json report_to_json(const EstimateReport& r) {
  nlohmann::ordered_json j;
  j["estimator"] = r.estimator;
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (std::size_t e = 0; e < r.size(); ++e) {
    nlohmann::ordered_json row;
    row["edge"] = r.edge_ids[e];
    row["alpha_hat"] = r.alpha[e];
    row["raw"] = std::isfinite(r.raw[e]) ? nlohmann::ordered_json(r.raw[e]) : nlohmann::ordered_json(nullptr);
    row["status"] = to_string(r.status[e]);
    if (e < r.ci_halfwidth.size()) row["ci_halfwidth"] = r.ci_halfwidth[e];
    edges.push_back(std::move(row));
  }
  j["edges"] = std::move(edges);
  j["diagnostics"] = {{"iterations", r.diagnostics.iterations},
                      {"residual", r.diagnostics.residual},
                      {"converged", r.diagnostics.converged},
                      {"notes", r.diagnostics.notes}};
  if (!r.intermediates.empty()) j["intermediates"] = r.intermediates;
  auto matrix = [](const Eigen::MatrixXd& m) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
      a.push_back(std::move(row));
    }
    return a;
  };
  if (r.fisher.size()) j["fisher"] = matrix(r.fisher);
  if (r.fisher_inverse.size()) j["fisher_inverse"] = matrix(r.fisher_inverse);
  return j;
}

}  // namespace nctomo
