#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "nctomo/mle.hpp"
#include "nctomo/simulate.hpp"

namespace nctomo {

enum class FisherMethod { numeric, closed_form_5link };

struct FisherResult {
  Eigen::MatrixXd information;  // edge-index order
  Eigen::MatrixXd inverse;
  double condition = 0;         // ratio of extreme singular values
  bool singular = false;        // inverse is then a pseudo-inverse
};

namespace detail {

inline void finish_fisher(FisherResult& r) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r.information);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0, smin = s.size() ? s(s.size() - 1) : 0.0;
  r.condition = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  r.singular = !(r.condition < 1e12);
  if (r.inverse.size() == 0)
    r.inverse = r.singular ? r.information.completeOrthogonalDecomposition().pseudoInverse()
                           : Eigen::MatrixXd(r.information.inverse());
}

}  // namespace detail

/// Closed-form inverse Fisher matrix of the 5-link tree, coordinates
/// (alpha_A, alpha_B, alpha_CD, alpha_E, alpha_F).
inline Eigen::Matrix<double, 5, 5> five_link_inverse_fisher(double aA, double aB, double aCD, double aE, double aF) {
  const double bA = 1 - aA, bB = 1 - aB, bE = 1 - aE, bF = 1 - aF;
  const double sEF = aE + aF - aE * aF, sAB = aA + aB - aA * aB;
  Eigen::Matrix<double, 5, 5> m = Eigen::Matrix<double, 5, 5>::Zero();
  m(0, 0) = aA * bA / (aB * aCD * sEF);
  m(0, 1) = m(1, 0) = bA * bB / (aCD * sEF);
  m(0, 2) = m(2, 0) = -bA * bB / (aB * sEF);
  m(1, 1) = aB * bB / (aA * aCD * sEF);
  m(1, 2) = m(2, 1) = -bA * bB / (aA * sEF);
  m(2, 3) = m(3, 2) = -bE * bF / (aF * sAB);
  m(2, 4) = m(4, 2) = -bE * bF / (aE * sAB);
  m(3, 3) = aE * bE / (aCD * aF * sAB);
  m(3, 4) = m(4, 3) = bE * bF / (aCD * sAB);
  m(4, 4) = aF * bF / (aCD * aE * sAB);
  const double lead = 1.0 / (aA * aB * aE * aF * (-aA * bB - aB) * (-aE * bF - aF));
  const double inner =
      -aB * bB * aE * aF - aA * aA * bB * aE * (-1 + aB * (2 + aCD * (-aE * bF - aF))) * aF +
      aA * (-aE * aF + aB * aB * aE * aF * (-3 + aCD * (aE + aF - aE * aF)) +
            aB * (-aF * bF + aE * (-1 + 7 * aF - 3 * aF * aF) + aE * aE * (1 - 3 * aF + 2 * aF * aF)));
  m(2, 2) = lead * (-aCD * inner);
  return m;
}

/// Fisher information I_pq = sum_x p(x) d_p log p(x) d_q log p(x). The numeric
/// method differentiates the exact outcome distribution by central differences;
/// the closed form applies to the 5-link tree (two sources, two receivers).
inline FisherResult fisher_matrix(const Configuration& cfg, const CodeAssignment& code, const LossModel& model,
                                  FisherMethod method = FisherMethod::numeric, double h = 1e-5) {
  model.validate();
  const std::size_t m = cfg.topology.edge_count();
  FisherResult r;
  if (method == FisherMethod::closed_form_5link) {
    const TreeModel tm = analyze_tree_model(cfg);
    const Topology& t = cfg.topology;
    if (m != 5 || cfg.sources.size() != 2 || cfg.receivers.size() != 2 || t.in_degree(tm.c) != 2 ||
        t.out_degree(tm.d) != 2 || cfg.is_source(tm.c) || cfg.is_receiver(tm.d))
      throw DomainError("closed-form Fisher matrix applies to the 5-link two-source tree only");
    const std::size_t order[5] = {t.out_edges(cfg.sources[0])[0], t.out_edges(cfg.sources[1])[0], tm.cd,
                                  t.in_edges(cfg.receivers[0])[0], t.in_edges(cfg.receivers[1])[0]};
    const auto& a = model.alpha;
    const auto inv = five_link_inverse_fisher(a[order[0]], a[order[1]], a[order[2]], a[order[3]], a[order[4]]);
    r.inverse = Eigen::MatrixXd::Zero(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int k = 0; k < 5; ++k) r.inverse(static_cast<Eigen::Index>(order[i]), static_cast<Eigen::Index>(order[k])) = inv(i, k);
    r.information = r.inverse.inverse();
    detail::finish_fisher(r);
    return r;
  }

  const OutcomeHistogram base = exact_distribution(cfg, code, model.alpha);
  std::vector<Outcome> support;
  std::vector<double> p;
  for (const auto& [x, w] : base.counts)
    if (w > 0) {
      support.push_back(x);
      p.push_back(w);
    }
  Eigen::MatrixXd grad(static_cast<Eigen::Index>(support.size()), static_cast<Eigen::Index>(m));
  for (std::size_t e = 0; e < m; ++e) {
    auto plus = model.alpha, minus = model.alpha;
    plus[e] += h;
    minus[e] -= h;
    const auto hp = exact_distribution(cfg, code, plus), hm = exact_distribution(cfg, code, minus);
    for (std::size_t i = 0; i < support.size(); ++i) {
      auto a = hp.counts.find(support[i]), b = hm.counts.find(support[i]);
      const double dp = ((a == hp.counts.end() ? 0.0 : a->second) - (b == hm.counts.end() ? 0.0 : b->second)) / (2 * h);
      grad(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e)) = dp / std::sqrt(p[i]);
    }
  }
  r.information = grad.transpose() * grad;
  detail::finish_fisher(r);
  return r;
}

/// Standard normal quantile: Acklam's rational approximation refined by one
/// Halley step, accurate to well below 1e-9.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs 0 < p < 1");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

struct ConfidenceIntervals {
  std::vector<double> halfwidth;  // NaN where flagged
  std::vector<char> flagged;      // negative (numerically) diagonal entry
};

/// Half-width z_{delta/2} * sqrt(I^-1_kk / n) per coordinate.
inline ConfidenceIntervals confidence_interval(const Eigen::MatrixXd& inverse, double n, double delta) {
  if (!(n >= 1)) throw DomainError("confidence interval needs n >= 1");
  if (!(delta > 0 && delta < 1)) throw DomainError("confidence level delta must lie in (0, 1)");
  const double z = normal_quantile(1 - delta / 2);
  ConfidenceIntervals ci;
  for (Eigen::Index k = 0; k < inverse.rows(); ++k) {
    const double v = inverse(k, k);
    ci.flagged.push_back(v < 0);
    ci.halfwidth.push_back(v < 0 ? std::nan("") : z * std::sqrt(v / n));
  }
  return ci;
}

}  // namespace nctomo
