#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "nctomo/error.hpp"

namespace nctomo {

enum class RowSense { le, eq, ge };

/// min c^T x  s.t.  rows,  lower <= x <= upper  (lower finite).
struct DenseLp {
  std::vector<double> cost, lower, upper;
  std::vector<std::vector<double>> a;  // dense rows
  std::vector<RowSense> sense;
  std::vector<double> rhs;
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    default: return "unbounded";
  }
}

struct SimplexResult {
  LpStatus status = LpStatus::infeasible;
  double objective = 0;
  std::vector<double> x;
  std::size_t pivots = 0;
  double infeasibility = 0;            // phase-1 optimum when infeasible
  std::vector<std::size_t> violated;   // rows still carrying artificial flow
};

namespace detail {

// Dense tableau; last column is the right-hand side, last row the objective.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0) {}
  double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c <= n_; ++c) at(pr, c) /= p;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

 private:
  std::size_t m_, n_;
  std::vector<double> t_;
};

// Bland's rule: lowest-index improving column, ties in the ratio test go to
// the lowest basic index. Returns false when unbounded.
inline bool run_simplex(Tableau& t, std::vector<std::size_t>& basis, const std::vector<char>& allowed, double eps,
                        std::size_t& pivots) {
  const std::size_t m = t.rows(), n = t.cols();
  for (;;) {
    std::size_t enter = n;
    for (std::size_t c = 0; c < n; ++c)
      if (allowed[c] && t.at(m, c) < -eps) {
        enter = c;
        break;
      }
    if (enter == n) return true;
    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double a = t.at(r, enter);
      if (a <= eps) continue;
      const double ratio = t.at(r, n) / a;
      if (leave == m || ratio < best - eps || (ratio <= best + eps && basis[r] < basis[leave])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave == m) return false;
    t.pivot(leave, enter);
    basis[leave] = enter;
    ++pivots;
  }
}

}  // namespace detail

/// Textbook two-phase dense simplex with Bland's anti-cycling rule.
inline SimplexResult simplex_solve(const DenseLp& lp, double eps = 1e-9) {
  const std::size_t nx = lp.cost.size(), nr = lp.a.size();
  if (lp.lower.size() != nx || lp.upper.size() != nx || lp.sense.size() != nr || lp.rhs.size() != nr)
    throw DomainError("inconsistent LP dimensions");
  for (std::size_t j = 0; j < nx; ++j)
    if (!std::isfinite(lp.lower[j])) throw DomainError("simplex needs finite lower bounds");

  // Shift x = lower + y, turn finite upper bounds into rows.
  struct Row {
    std::vector<double> a;
    RowSense s;
    double b;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < nr; ++i) {
    if (lp.a[i].size() != nx) throw DomainError("inconsistent LP row width");
    double b = lp.rhs[i];
    for (std::size_t j = 0; j < nx; ++j) b -= lp.a[i][j] * lp.lower[j];
    rows.push_back({lp.a[i], lp.sense[i], b});
  }
  for (std::size_t j = 0; j < nx; ++j)
    if (std::isfinite(lp.upper[j])) {
      std::vector<double> a(nx, 0.0);
      a[j] = 1;
      rows.push_back({std::move(a), RowSense::le, lp.upper[j] - lp.lower[j]});
    }
  for (auto& r : rows)
    if (r.b < 0) {
      for (auto& v : r.a) v = -v;
      r.b = -r.b;
      r.s = r.s == RowSense::le ? RowSense::ge : r.s == RowSense::ge ? RowSense::le : RowSense::eq;
    }

  const std::size_t m = rows.size();
  std::size_t slacks = 0, arts = 0;
  for (const auto& r : rows) {
    slacks += r.s != RowSense::eq;
    arts += r.s != RowSense::le;
  }
  const std::size_t n = nx + slacks + arts, art0 = nx + slacks;
  detail::Tableau t(m, n);
  std::vector<std::size_t> basis(m);
  std::vector<std::size_t> art_row;
  std::size_t sc = nx, ac = art0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nx; ++j) t.at(i, j) = rows[i].a[j];
    t.rhs(i) = rows[i].b;
    if (rows[i].s == RowSense::le) {
      t.at(i, sc) = 1;
      basis[i] = sc++;
    } else {
      if (rows[i].s == RowSense::ge) t.at(i, sc++) = -1;
      t.at(i, ac) = 1;
      basis[i] = ac++;
      art_row.push_back(i);
    }
  }

  SimplexResult res;
  // phase 1: minimise the sum of artificials
  for (auto i : art_row) {
    for (std::size_t c = 0; c < n; ++c)
      if (c < art0) t.at(m, c) -= t.at(i, c);
    t.at(m, n) -= t.rhs(i);
  }
  std::vector<char> allowed(n, 1);
  detail::run_simplex(t, basis, allowed, eps, res.pivots);
  const double phase1 = -t.at(m, n);
  const double scale = 1.0 + [&] {
    double s = 0;
    for (const auto& r : rows) s = std::max(s, std::abs(r.b));
    return s;
  }();
  if (phase1 > 1e-9 * scale) {
    res.status = LpStatus::infeasible;
    res.infeasibility = phase1;
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] >= art0 && t.rhs(i) > 1e-9 * scale && i < nr) res.violated.push_back(i);
    return res;
  }
  // drive zero-level artificials out of the basis; rows without a pivot are redundant
  std::vector<char> dead(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < art0) continue;
    std::size_t c = 0;
    while (c < art0 && std::abs(t.at(i, c)) <= eps) ++c;
    if (c < art0) {
      t.pivot(i, c);
      basis[i] = c;
      ++res.pivots;
    } else {
      dead[i] = 1;
    }
  }
  for (std::size_t c = art0; c < n; ++c) allowed[c] = 0;
  for (std::size_t c = 0; c <= n; ++c) t.at(m, c) = 0;
  for (std::size_t j = 0; j < nx; ++j) t.at(m, j) = lp.cost[j];
  for (std::size_t i = 0; i < m; ++i) {
    if (dead[i]) continue;
    const double f = t.at(m, basis[i]);
    if (f == 0.0) continue;
    for (std::size_t c = 0; c <= n; ++c) t.at(m, c) -= f * t.at(i, c);
  }
  // redundant rows keep an artificial basic at zero; pinning it there is harmless
  if (!detail::run_simplex(t, basis, allowed, eps, res.pivots)) {
    res.status = LpStatus::unbounded;
    return res;
  }
  res.status = LpStatus::optimal;
  res.x.assign(nx, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < nx) res.x[basis[i]] = t.rhs(i);
  for (std::size_t j = 0; j < nx; ++j) res.x[j] += lp.lower[j];
  res.objective = 0;
  for (std::size_t j = 0; j < nx; ++j) res.objective += lp.cost[j] * res.x[j];
  return res;
}

}  // namespace nctomo
