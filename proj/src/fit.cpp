#include "fairalloc/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fairalloc {

namespace {

constexpr int kP = 4;  // regressors per group
constexpr const char* kRegressorNames[kP] = {"nearby_calculus(alpha)", "nearby_apib(beta)",
                                             "counselors(gamma)", "intercept(theta)"};
constexpr double kPivotRatioTol = 1e-10;

// Pivoted Cholesky of a symmetric PSD 4x4 matrix. Returns false and the set
// of uneliminated columns when a pivot falls below kPivotRatioTol times the
// largest pivot.
bool pivoted_cholesky_solve(std::array<std::array<double, kP>, kP> xtx,
                            std::array<double, kP> xty, std::array<double, kP>& beta,
                            std::array<std::array<double, kP>, kP>& inverse,
                            std::vector<int>& deficient) {
  // Work on the full symmetric matrix with explicit pivoting; for a 4x4
  // system Gauss-Jordan with diagonal pivoting is simplest and exposes the
  // rank-deficient columns directly.
  std::array<int, kP> perm{};
  std::array<bool, kP> eliminated{};
  std::array<std::array<double, kP>, kP> aug{};  // [xtx | I]
  std::array<std::array<double, kP>, kP> rhs{};
  for (int r = 0; r < kP; ++r) {
    aug[r] = xtx[r];
    rhs[r].fill(0.0);
    rhs[r][r] = 1.0;
  }

  double first_pivot = 0.0;
  for (int step = 0; step < kP; ++step) {
    int piv = -1;
    double best = -1.0;
    for (int c = 0; c < kP; ++c) {
      if (!eliminated[c] && aug[c][c] > best) {
        best = aug[c][c];
        piv = c;
      }
    }
    if (step == 0) first_pivot = best;
    if (piv < 0 || best <= kPivotRatioTol * std::max(first_pivot, 1e-300)) {
      for (int c = 0; c < kP; ++c)
        if (!eliminated[c]) deficient.push_back(c);
      return false;
    }
    eliminated[piv] = true;
    perm[step] = piv;
    const double d = aug[piv][piv];
    for (int c = 0; c < kP; ++c) {
      aug[piv][c] /= d;
      rhs[piv][c] /= d;
    }
    for (int r = 0; r < kP; ++r) {
      if (r == piv) continue;
      const double f = aug[r][piv];
      if (f == 0.0) continue;
      for (int c = 0; c < kP; ++c) {
        aug[r][c] -= f * aug[piv][c];
        rhs[r][c] -= f * rhs[piv][c];
      }
    }
  }

  // aug is now the identity (up to roundoff); rhs holds xtx^{-1}.
  inverse = rhs;
  for (int r = 0; r < kP; ++r) {
    beta[r] = 0.0;
    for (int c = 0; c < kP; ++c) beta[r] += rhs[r][c] * xty[c];
  }
  return true;
}

}  // namespace

void FitDataset::validate() const {
  const std::size_t n = group.size();
  if (ap_ib.size() != n || counselors.size() != n || calculus.size() != n || outcome.size() != n)
    throw std::invalid_argument("fit dataset: column lengths differ");
  if (graph.unit_count() != n) throw std::invalid_argument("fit dataset: graph size mismatch");
  if (groups.labels.empty()) throw std::invalid_argument("fit dataset: empty group domain");
  for (std::size_t i = 0; i < n; ++i) {
    if (group[i] < 0 || static_cast<std::size_t>(group[i]) >= groups.size())
      throw std::invalid_argument("fit dataset: group index out of range");
    if (ap_ib[i] != 0.0 && ap_ib[i] != 1.0)
      throw std::invalid_argument("fit dataset: ap_ib must be 0/1");
    if (calculus[i] != 0.0 && calculus[i] != 1.0)
      throw std::invalid_argument("fit dataset: calculus must be 0/1");
    if (counselors[i] < 0.0) throw std::invalid_argument("fit dataset: counselors must be >= 0");
    if (!std::isfinite(outcome[i])) throw std::invalid_argument("fit dataset: non-finite outcome");
  }
}

std::array<double, 4> fit_regressors(const FitDataset& data, std::size_t i) {
  const auto& nb = data.graph.neighbors[i];
  const auto& sim = data.graph.sims[i];
  double calc_max = 0.0;
  double apib_max = 0.0;
  for (std::size_t s = 0; s < nb.size(); ++s) {
    const auto j = static_cast<std::size_t>(nb[s]);
    if (data.calculus[j] == 1.0) calc_max = std::max(calc_max, sim[s]);
    apib_max = std::max(apib_max, sim[s] * data.ap_ib[j]);
  }
  return {calc_max, apib_max, data.counselors[i], 1.0};
}

FitResult fit_max_interference(const FitDataset& data) {
  data.validate();
  const std::size_t n = data.size();
  const std::size_t n_groups = data.groups.size();

  FitResult result;
  result.params.alpha.assign(n_groups, 0.0);
  result.params.beta.assign(n_groups, 0.0);
  result.params.gamma.assign(n_groups, 0.0);
  result.params.theta.assign(n_groups, 0.0);
  result.std_errors = result.params;
  result.residual_variance.assign(n_groups, 0.0);
  result.n_per_group.assign(n_groups, 0);

  std::vector<std::array<double, kP>> regressors(n);
  for (std::size_t i = 0; i < n; ++i) {
    regressors[i] = fit_regressors(data, i);
    result.n_per_group[static_cast<std::size_t>(data.group[i])] += 1;
  }

  for (std::size_t a = 0; a < n_groups; ++a) {
    const int n_a = result.n_per_group[a];
    if (n_a == 0) continue;  // absent group keeps zero parameters
    if (n_a < kP)
      throw std::invalid_argument("fit: group '" + data.groups.labels[a] + "' has only " +
                                  std::to_string(n_a) + " units; need at least 4");

    std::array<std::array<double, kP>, kP> xtx{};
    std::array<double, kP> xty{};
    xty.fill(0.0);
    for (auto& row : xtx) row.fill(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(data.group[i]) != a) continue;
      const auto& x = regressors[i];
      for (int r = 0; r < kP; ++r) {
        xty[r] += x[static_cast<std::size_t>(r)] * data.outcome[i];
        for (int c = 0; c < kP; ++c)
          xtx[r][c] += x[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(c)];
      }
    }

    std::array<double, kP> beta{};
    std::array<std::array<double, kP>, kP> inv{};
    std::vector<int> deficient;
    if (!pivoted_cholesky_solve(xtx, xty, beta, inv, deficient)) {
      std::string msg = "fit: rank-deficient design for group '" + data.groups.labels[a] +
                        "'; collinear regressors:";
      for (int c : deficient) msg += std::string(" ") + kRegressorNames[c];
      throw std::invalid_argument(msg);
    }

    result.params.alpha[a] = beta[0];
    result.params.beta[a] = beta[1];
    result.params.gamma[a] = beta[2];
    result.params.theta[a] = beta[3];

    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(data.group[i]) != a) continue;
      const auto& x = regressors[i];
      double pred = 0.0;
      for (int r = 0; r < kP; ++r) pred += beta[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(r)];
      const double res = data.outcome[i] - pred;
      rss += res * res;
    }
    result.residual_variance[a] = rss / static_cast<double>(n_a);

    // Unbiased variance for the standard errors; zero when the system is square.
    const double s2 = n_a > kP ? rss / static_cast<double>(n_a - kP) : 0.0;
    result.std_errors.alpha[a] = std::sqrt(std::max(0.0, s2 * inv[0][0]));
    result.std_errors.beta[a] = std::sqrt(std::max(0.0, s2 * inv[1][1]));
    result.std_errors.gamma[a] = std::sqrt(std::max(0.0, s2 * inv[2][2]));
    result.std_errors.theta[a] = std::sqrt(std::max(0.0, s2 * inv[3][3]));
  }
  return result;
}

}  // namespace fairalloc
