#include "fairalloc/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace fairalloc::lp {

namespace {
constexpr double kInfeasEps = 1e-9;
constexpr double kRatioTieTol = 1e-10;

double bound_tol(double bound) { return 1e-9 * std::max(1.0, std::abs(bound)); }
}  // namespace

BoundedSimplex::BoundedSimplex(std::vector<double> objective)
    : n_struct_(objective.size()), objective_(std::move(objective)) {
  cols_.resize(n_struct_);
  lower_.assign(n_struct_, 0.0);
  upper_.assign(n_struct_, 1.0);
  status_.assign(n_struct_, VarStatus::kAtLower);
  basic_slot_.assign(n_struct_, -1);
}

int BoundedSimplex::add_row(const std::vector<std::pair<int, double>>& terms, Sense sense,
                            double rhs) {
  const auto r = static_cast<int>(row_count());
  const std::size_t m_old = row_count();

  for (const auto& [var, coef] : terms) {
    assert(var >= 0 && static_cast<std::size_t>(var) < n_struct_);
    cols_[static_cast<std::size_t>(var)].emplace_back(r, coef);
  }
  row_rhs_.push_back(rhs);
  row_sense_.push_back(sense);

  const std::size_t slack = n_struct_ + static_cast<std::size_t>(r);
  lower_.push_back(0.0);
  upper_.push_back(sense == Sense::kLessEqual ? kInf : 0.0);
  status_.push_back(VarStatus::kBasic);
  basic_slot_.push_back(static_cast<int>(m_old));
  basis_.push_back(static_cast<int>(slack));

  // Grow the stored inverse. With the new slack basic,
  // B'^{-1} = [[B^{-1}, 0], [-a_B B^{-1}, 1]].
  const std::size_t m_new = m_old + 1;
  if (m_new > binv_cap_) {
    const std::size_t cap = std::max<std::size_t>(64, m_new * 2);
    std::vector<double> grown(cap * cap, 0.0);
    for (std::size_t i = 0; i < m_old; ++i)
      std::memcpy(&grown[i * cap], &binv_[i * binv_cap_], m_old * sizeof(double));
    binv_ = std::move(grown);
    binv_cap_ = cap;
  }
  for (std::size_t i = 0; i < m_old; ++i) binv_[i * binv_cap_ + m_old] = 0.0;
  double* bottom = &binv_[m_old * binv_cap_];
  std::fill(bottom, bottom + m_new, 0.0);
  for (const auto& [var, coef] : terms) {
    const int slot = basic_slot_[static_cast<std::size_t>(var)];
    if (slot < 0 || static_cast<std::size_t>(slot) >= m_old) continue;
    const double* row = &binv_[static_cast<std::size_t>(slot) * binv_cap_];
    for (std::size_t c = 0; c < m_old; ++c) bottom[c] -= coef * row[c];
  }
  bottom[m_old] = 1.0;

  // Slack value keeps the row consistent with the current point.
  double activity = 0.0;
  for (const auto& [var, coef] : terms) {
    const auto v = static_cast<std::size_t>(var);
    const int slot = basic_slot_[v];
    activity += coef * (slot >= 0 && static_cast<std::size_t>(slot) < m_old
                            ? x_basic_[static_cast<std::size_t>(slot)]
                            : nonbasic_value(v));
  }
  x_basic_.push_back(rhs - activity);
  return r;
}

void BoundedSimplex::set_bounds(int var, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("simplex: lower bound above upper bound");
  lower_[static_cast<std::size_t>(var)] = lo;
  upper_[static_cast<std::size_t>(var)] = hi;
}

double BoundedSimplex::nonbasic_value(std::size_t var) const {
  return status_[var] == VarStatus::kAtUpper ? upper_[var] : lower_[var];
}

double BoundedSimplex::value(int var) const {
  const auto v = static_cast<std::size_t>(var);
  const int slot = basic_slot_[v];
  return slot >= 0 ? x_basic_[static_cast<std::size_t>(slot)] : nonbasic_value(v);
}

double BoundedSimplex::objective_value() const {
  double total = 0.0;
  for (std::size_t j = 0; j < n_struct_; ++j) {
    if (objective_[j] != 0.0) total += objective_[j] * value(static_cast<int>(j));
  }
  return total;
}

void BoundedSimplex::normalize_nonbasic_statuses() {
  for (std::size_t v = 0; v < var_count(); ++v) {
    if (status_[v] == VarStatus::kBasic) continue;
    if (status_[v] == VarStatus::kAtUpper && !std::isfinite(upper_[v]))
      status_[v] = VarStatus::kAtLower;
    if (lower_[v] == upper_[v]) status_[v] = VarStatus::kAtLower;
  }
}

void BoundedSimplex::compute_basic_values() {
  const std::size_t m = row_count();
  std::vector<double> rhs_eff(row_rhs_);
  for (std::size_t j = 0; j < n_struct_; ++j) {
    if (status_[j] == VarStatus::kBasic) continue;
    const double v = nonbasic_value(j);
    if (v == 0.0) continue;
    for (const auto& [r, coef] : cols_[j]) rhs_eff[static_cast<std::size_t>(r)] -= coef * v;
  }
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t slack = n_struct_ + r;
    if (status_[slack] == VarStatus::kBasic) continue;
    const double v = nonbasic_value(slack);
    if (v != 0.0) rhs_eff[r] -= v;
  }
  x_basic_.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = &binv_[i * binv_cap_];
    double acc = 0.0;
    for (std::size_t c = 0; c < m; ++c) acc += row[c] * rhs_eff[c];
    x_basic_[i] = acc;
  }
}

double BoundedSimplex::total_infeasibility() const {
  double total = 0.0;
  for (std::size_t r = 0; r < row_count(); ++r) {
    const auto v = static_cast<std::size_t>(basis_[r]);
    const double x = x_basic_[r];
    if (x < lower_[v] - bound_tol(lower_[v]))
      total += lower_[v] - x;
    else if (std::isfinite(upper_[v]) && x > upper_[v] + bound_tol(upper_[v]))
      total += x - upper_[v];
  }
  return total;
}

void BoundedSimplex::btran(const std::vector<double>& weights, std::vector<double>& y) const {
  const std::size_t m = row_count();
  y.assign(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const double w = weights[r];
    if (w == 0.0) continue;
    const double* row = &binv_[r * binv_cap_];
    for (std::size_t c = 0; c < m; ++c) y[c] += w * row[c];
  }
}

void BoundedSimplex::ftran_column(std::size_t var, std::vector<double>& w) const {
  const std::size_t m = row_count();
  w.assign(m, 0.0);
  if (is_slack(var)) {
    const std::size_t r = slack_row(var);
    for (std::size_t i = 0; i < m; ++i) w[i] = binv_[i * binv_cap_ + r];
    return;
  }
  for (const auto& [r, coef] : cols_[var]) {
    const auto rr = static_cast<std::size_t>(r);
    for (std::size_t i = 0; i < m; ++i) w[i] += coef * binv_[i * binv_cap_ + rr];
  }
}

double BoundedSimplex::reduced_cost(std::size_t var, const std::vector<double>& y,
                                    double own_cost) const {
  double d = own_cost;
  if (is_slack(var)) {
    d -= y[slack_row(var)];
  } else {
    for (const auto& [r, coef] : cols_[var]) d -= coef * y[static_cast<std::size_t>(r)];
  }
  return d;
}

bool BoundedSimplex::price(bool phase_one, bool bland, Step& step) const {
  const std::size_t m = row_count();
  work_weights_.assign(m, 0.0);
  if (phase_one) {
    for (std::size_t r = 0; r < m; ++r) {
      const auto v = static_cast<std::size_t>(basis_[r]);
      const double x = x_basic_[r];
      if (x < lower_[v] - bound_tol(lower_[v]))
        work_weights_[r] = 1.0;  // raising this basic reduces infeasibility
      else if (std::isfinite(upper_[v]) && x > upper_[v] + bound_tol(upper_[v]))
        work_weights_[r] = -1.0;
    }
  } else {
    for (std::size_t r = 0; r < m; ++r) {
      const auto v = static_cast<std::size_t>(basis_[r]);
      work_weights_[r] = is_slack(v) ? 0.0 : objective_[v];
    }
  }
  btran(work_weights_, work_y_);

  step.entering = var_count();
  step.direction = 0;
  double best = kDualTol;
  for (std::size_t v = 0; v < var_count(); ++v) {
    if (status_[v] == VarStatus::kBasic) continue;
    if (lower_[v] == upper_[v]) continue;  // fixed
    const double own = phase_one || is_slack(v) ? 0.0 : objective_[v];
    const double d = reduced_cost(v, work_y_, own);
    int dir = 0;
    double merit = 0.0;
    if (status_[v] == VarStatus::kAtLower && d > kDualTol) {
      dir = 1;
      merit = d;
    } else if (status_[v] == VarStatus::kAtUpper && d < -kDualTol) {
      dir = -1;
      merit = -d;
    }
    if (dir == 0) continue;
    if (bland) {
      step.entering = v;
      step.direction = dir;
      return true;
    }
    if (merit > best) {
      best = merit;
      step.entering = v;
      step.direction = dir;
    }
  }
  return step.direction != 0;
}

bool BoundedSimplex::ratio_test(bool phase_one, Step& step, const std::vector<double>& w,
                                bool bland) const {
  const std::size_t q = step.entering;
  const double sigma = step.direction;
  const double range = upper_[q] - lower_[q];

  double t_best = std::isfinite(range) ? range : kInf;
  int best_slot = -1;
  bool best_to_upper = false;
  double best_pivot = 0.0;

  const std::size_t m = row_count();
  for (std::size_t r = 0; r < m; ++r) {
    if (std::abs(w[r]) <= kPivotTol) continue;
    const auto v = static_cast<std::size_t>(basis_[r]);
    const double delta = -sigma * w[r];  // movement rate of this basic
    const double x = x_basic_[r];
    const double lo = lower_[v];
    const double hi = upper_[v];

    double t = kInf;
    bool to_upper = false;
    const bool below = x < lo - bound_tol(lo);
    const bool above = std::isfinite(hi) && x > hi + bound_tol(hi);
    if (phase_one && below) {
      if (delta > 0.0) t = (lo - x) / delta;  // reaches its violated lower bound
    } else if (phase_one && above) {
      if (delta < 0.0) {
        t = (hi - x) / delta;
        to_upper = true;
      }
    } else if (delta > 0.0) {
      if (std::isfinite(hi)) {
        t = (hi - x) / delta;
        to_upper = true;
      }
    } else if (std::isfinite(lo)) {
      t = (lo - x) / delta;
    }
    if (!std::isfinite(t)) continue;
    t = std::max(t, 0.0);

    bool take = false;
    if (t < t_best - kRatioTieTol) {
      take = true;
    } else if (t <= t_best + kRatioTieTol && best_slot >= 0) {
      if (bland) {
        take = basis_[r] < basis_[static_cast<std::size_t>(best_slot)];
      } else {
        const double p = std::abs(w[r]);
        take = p > best_pivot ||
               (p == best_pivot && basis_[r] < basis_[static_cast<std::size_t>(best_slot)]);
      }
    }
    if (take) {
      t_best = std::min(t, t_best);
      best_slot = static_cast<int>(r);
      best_to_upper = to_upper;
      best_pivot = std::abs(w[r]);
    }
  }

  if (!std::isfinite(t_best)) return false;  // unbounded direction
  step.length = t_best;
  step.blocking_slot = best_slot;
  step.blocking_to_upper = best_to_upper;
  return true;
}

void BoundedSimplex::take_step(const Step& step, const std::vector<double>& w) {
  const std::size_t q = step.entering;
  const double sigma = step.direction;
  const double t = step.length;
  const std::size_t m = row_count();

  if (t != 0.0) {
    for (std::size_t r = 0; r < m; ++r) x_basic_[r] -= sigma * t * w[r];
  }
  if (step.blocking_slot < 0) {
    status_[q] = status_[q] == VarStatus::kAtLower ? VarStatus::kAtUpper : VarStatus::kAtLower;
    return;
  }
  const auto slot = static_cast<std::size_t>(step.blocking_slot);
  const auto leaving = static_cast<std::size_t>(basis_[slot]);
  status_[leaving] = step.blocking_to_upper ? VarStatus::kAtUpper : VarStatus::kAtLower;
  basic_slot_[leaving] = -1;

  const double entering_start = nonbasic_value(q);
  x_basic_[slot] = entering_start + sigma * t;
  basis_[slot] = static_cast<int>(q);
  basic_slot_[q] = static_cast<int>(slot);
  status_[q] = VarStatus::kBasic;

  apply_eta(slot, w);
}

void BoundedSimplex::apply_eta(std::size_t pivot_slot, const std::vector<double>& w) {
  const std::size_t m = row_count();
  const double inv_pivot = 1.0 / w[pivot_slot];
  double* prow = &binv_[pivot_slot * binv_cap_];
  for (std::size_t c = 0; c < m; ++c) prow[c] *= inv_pivot;
  for (std::size_t r = 0; r < m; ++r) {
    if (r == pivot_slot) continue;
    const double f = w[r];
    if (f == 0.0) continue;
    double* row = &binv_[r * binv_cap_];
    for (std::size_t c = 0; c < m; ++c) row[c] -= f * prow[c];
  }
}

void BoundedSimplex::rebuild_inverse() {
  const std::size_t m = row_count();
  std::vector<double> mat(m * m, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    const auto v = static_cast<std::size_t>(basis_[s]);
    if (is_slack(v)) {
      mat[slack_row(v) * m + s] = 1.0;
    } else {
      for (const auto& [r, coef] : cols_[v]) mat[static_cast<std::size_t>(r) * m + s] = coef;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double* row = &binv_[i * binv_cap_];
    std::fill(row, row + m, 0.0);
    row[i] = 1.0;
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    double best = std::abs(mat[col * m + col]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const double a = std::abs(mat[r * m + col]);
      if (a > best) {
        best = a;
        piv = r;
      }
    }
    if (best < 1e-12) throw std::runtime_error("simplex: singular basis during refactorization");
    if (piv != col) {
      for (std::size_t c = 0; c < m; ++c) std::swap(mat[piv * m + c], mat[col * m + c]);
      for (std::size_t c = 0; c < m; ++c)
        std::swap(binv_[piv * binv_cap_ + c], binv_[col * binv_cap_ + c]);
    }
    const double d = mat[col * m + col];
    for (std::size_t c = 0; c < m; ++c) mat[col * m + c] /= d;
    for (std::size_t c = 0; c < m; ++c) binv_[col * binv_cap_ + c] /= d;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = mat[r * m + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < m; ++c) mat[r * m + c] -= f * mat[col * m + c];
      for (std::size_t c = 0; c < m; ++c)
        binv_[r * binv_cap_ + c] -= f * binv_[col * binv_cap_ + c];
    }
  }
}

double BoundedSimplex::basic_residual() const {
  const std::size_t m = row_count();
  std::vector<double> activity(row_rhs_);
  for (std::size_t j = 0; j < n_struct_; ++j) {
    const int slot = basic_slot_[j];
    const double v = slot >= 0 ? x_basic_[static_cast<std::size_t>(slot)] : nonbasic_value(j);
    if (v == 0.0) continue;
    for (const auto& [r, coef] : cols_[j]) activity[static_cast<std::size_t>(r)] -= coef * v;
  }
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t slack = n_struct_ + r;
    const int slot = basic_slot_[slack];
    activity[r] -= slot >= 0 ? x_basic_[static_cast<std::size_t>(slot)] : nonbasic_value(slack);
  }
  double worst = 0.0;
  for (std::size_t r = 0; r < m; ++r)
    worst = std::max(worst, std::abs(activity[r]) / std::max(1.0, std::abs(row_rhs_[r])));
  return worst;
}

Status BoundedSimplex::solve() {
  normalize_nonbasic_statuses();
  compute_basic_values();

  const long bland_after = 10 * static_cast<long>(row_count() + var_count());
  const long hard_limit = 200 * static_cast<long>(row_count() + var_count()) + 10000;
  long iters = 0;
  bool bland = false;
  int feasibility_restarts = 0;

  bool phase_one = total_infeasibility() > kInfeasEps;
  Step step;
  while (true) {
    if (phase_one && total_infeasibility() <= kInfeasEps) phase_one = false;

    if (!price(phase_one, bland, step)) {
      if (phase_one) {
        if (total_infeasibility() > kInfeasEps) return Status::kInfeasible;
        phase_one = false;
        continue;
      }
      if (basic_residual() > 1e-8) {
        rebuild_inverse();
        compute_basic_values();
      }
      if (total_infeasibility() > kInfeasEps) {
        if (++feasibility_restarts > 3) return Status::kCycleLimit;
        phase_one = true;
        continue;
      }
      return Status::kOptimal;
    }

    ftran_column(step.entering, work_w_);
    if (!ratio_test(phase_one, step, work_w_, bland)) {
      return phase_one ? Status::kCycleLimit : Status::kUnbounded;
    }
    take_step(step, work_w_);

    ++iters;
    ++total_iterations_;
    if (!bland && iters > bland_after) bland = true;
    if (iters > hard_limit) return Status::kCycleLimit;
    if ((iters & 1023) == 0) {
      if (basic_residual() > 1e-8) {
        rebuild_inverse();
        compute_basic_values();
      }
      if (!phase_one && total_infeasibility() > kInfeasEps) phase_one = true;
    }
  }
}

}  // namespace fairalloc::lp
