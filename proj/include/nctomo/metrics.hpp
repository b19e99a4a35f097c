#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "nctomo/report.hpp"

namespace nctomo {

struct Metrics {
  std::vector<double> mse;  // per edge
  double ent = 0;           // sum_e ln MSE_e; -inf when some MSE is exactly 0
  double ent_av = 0;        // ENT / |E|
  bool ent_is_minus_infinity = false;
};

inline Metrics metrics(const std::vector<double>& truth, const std::vector<EstimateReport>& trials) {
  if (trials.empty()) throw DomainError("metrics need at least one trial");
  Metrics m;
  m.mse.assign(truth.size(), 0.0);
  for (const auto& r : trials) {
    if (r.alpha.size() != truth.size()) throw DomainError("estimate does not match the loss model");
    for (std::size_t e = 0; e < truth.size(); ++e) m.mse[e] += (r.alpha[e] - truth[e]) * (r.alpha[e] - truth[e]);
  }
  for (auto& v : m.mse) {
    v /= static_cast<double>(trials.size());
    if (v == 0.0) m.ent_is_minus_infinity = true;
    m.ent += std::log(v);
  }
  if (m.ent_is_minus_infinity) m.ent = -std::numeric_limits<double>::infinity();
  m.ent_av = truth.empty() ? 0.0 : m.ent / static_cast<double>(truth.size());
  return m;
}

}  // namespace nctomo
