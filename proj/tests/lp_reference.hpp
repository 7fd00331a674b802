#pragma once

// Test-only LP oracle: enumerates candidate vertices of
//   max c'x  s.t.  A_le x <= b_le,  A_eq x = b_eq,  0 <= x <= u (u finite)
// by solving every n x n system of tight constraints drawn from the
// inequality rows and the variable bounds (equality rows are always tight).
// Exact for small problems and entirely independent of the simplex code.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace lp_reference {

struct DenseLp {
  std::vector<double> c;
  std::vector<std::vector<double>> a_le;
  std::vector<double> b_le;
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
  std::vector<double> upper;  // lower bounds are all 0
};

struct Result {
  bool feasible = false;
  double objective = -std::numeric_limits<double>::infinity();
  std::vector<double> x;
};

inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m,
                                                       std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-11) return std::nullopt;
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) m[r][k] -= f * m[col][k];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) rhs[i] /= m[i][i];
  return rhs;
}

inline Result solve(const DenseLp& lp) {
  const std::size_t n = lp.c.size();
  // constraint catalogue: each entry is (row, rhs)
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (std::size_t r = 0; r < lp.a_eq.size(); ++r) {
    rows.push_back(lp.a_eq[r]);
    rhs.push_back(lp.b_eq[r]);
  }
  const std::size_t n_eq = rows.size();
  for (std::size_t r = 0; r < lp.a_le.size(); ++r) {
    rows.push_back(lp.a_le[r]);
    rhs.push_back(lp.b_le[r]);
  }
  for (std::size_t j = 0; j < n; ++j) {  // x_j = 0
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    rows.push_back(e);
    rhs.push_back(0.0);
  }
  for (std::size_t j = 0; j < n; ++j) {  // x_j = u_j
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    rows.push_back(e);
    rhs.push_back(lp.upper[j]);
  }

  Result best;
  if (n_eq > n) return best;

  // iterate over all subsets of size n that include every equality row
  const std::size_t total = rows.size();
  const std::size_t need = n - n_eq;

  auto feasible_at = [&](const std::vector<double>& x) {
    for (std::size_t j = 0; j < n; ++j)
      if (x[j] < -1e-7 || x[j] > lp.upper[j] + 1e-7) return false;
    for (std::size_t r = 0; r < lp.a_le.size(); ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += lp.a_le[r][j] * x[j];
      if (acc > lp.b_le[r] + 1e-7) return false;
    }
    for (std::size_t r = 0; r < lp.a_eq.size(); ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += lp.a_eq[r][j] * x[j];
      if (std::abs(acc - lp.b_eq[r]) > 1e-7) return false;
    }
    return true;
  };

  auto consider = [&](const std::vector<std::size_t>& chosen) {
    std::vector<std::vector<double>> m;
    std::vector<double> r;
    for (std::size_t e = 0; e < n_eq; ++e) {
      m.push_back(rows[e]);
      r.push_back(rhs[e]);
    }
    for (std::size_t k : chosen) {
      m.push_back(rows[k]);
      r.push_back(rhs[k]);
    }
    const auto x = solve_square(std::move(m), std::move(r));
    if (!x) return;
    if (!feasible_at(*x)) return;
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.c[j] * (*x)[j];
    if (!best.feasible || obj > best.objective) {
      best.feasible = true;
      best.objective = obj;
      best.x = *x;
    }
  };

  // choose `need` indices from [n_eq, total)
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (chosen.size() == need) {
      consider(chosen);
      return;
    }
    for (std::size_t k = from; k < total; ++k) {
      chosen.push_back(k);
      rec(k + 1);
      chosen.pop_back();
    }
  };
  rec(n_eq);
  return best;
}

}  // namespace lp_reference
