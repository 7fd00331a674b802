#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace fairalloc::lp {

enum class Status : std::uint8_t {
  kOptimal,
  kInfeasible,
  kCycleLimit,  // iteration guard exceeded even under Bland's rule
  kUnbounded,
};

enum class Sense : std::uint8_t { kLessEqual, kEqual };

/// Bounded-variable primal simplex, maximizing. Rows may be added between
/// solves and variable bounds changed; solve() restarts from the current
/// basis and runs a composite phase 1 on any out-of-bound basics before
/// optimizing. Every row carries a slack (fixed to 0 for equalities), so the
/// initial basis is the identity. The basis inverse is kept explicitly and
/// updated per pivot; Dantzig pricing switches to Bland's rule after
/// 10 * (rows + cols) iterations of one solve to rule out cycling.
class BoundedSimplex {
 public:
  /// One objective coefficient per structural variable (maximize).
  /// Structural bounds default to [0, 1].
  explicit BoundedSimplex(std::vector<double> objective);

  /// Adds a row over structural variables; returns its index. The row's
  /// slack starts basic.
  int add_row(const std::vector<std::pair<int, double>>& terms, Sense sense, double rhs);

  void set_bounds(int var, double lo, double hi);
  double lower(int var) const { return lower_[static_cast<std::size_t>(var)]; }
  double upper(int var) const { return upper_[static_cast<std::size_t>(var)]; }

  Status solve();

  /// Value of any variable, structural or slack (valid after kOptimal).
  double value(int var) const;
  /// Objective over structural variables.
  double objective_value() const;

  std::size_t structural_count() const { return n_struct_; }
  std::size_t row_count() const { return row_rhs_.size(); }
  long iterations() const { return total_iterations_; }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr double kDualTol = 1e-9;
  static constexpr double kPivotTol = 1e-9;

  enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper };

  struct Step {
    std::size_t entering = 0;
    int direction = 0;       // +1 leaving lower bound, -1 leaving upper
    double length = 0.0;
    int blocking_slot = -1;  // -1: entering flips to its other bound
    bool blocking_to_upper = false;
  };

  std::size_t var_count() const { return n_struct_ + row_count(); }
  bool is_slack(std::size_t var) const { return var >= n_struct_; }
  std::size_t slack_row(std::size_t var) const { return var - n_struct_; }

  double nonbasic_value(std::size_t var) const;
  void normalize_nonbasic_statuses();
  void compute_basic_values();
  double total_infeasibility() const;

  void btran(const std::vector<double>& weights, std::vector<double>& y) const;
  void ftran_column(std::size_t var, std::vector<double>& w) const;
  double reduced_cost(std::size_t var, const std::vector<double>& y, double own_cost) const;

  bool price(bool phase_one, bool bland, Step& step) const;
  bool ratio_test(bool phase_one, Step& step, const std::vector<double>& w, bool bland) const;
  void take_step(const Step& step, const std::vector<double>& w);

  void apply_eta(std::size_t pivot_slot, const std::vector<double>& w);
  void rebuild_inverse();
  double basic_residual() const;

  std::size_t n_struct_ = 0;
  std::vector<double> objective_;

  // Columns of added rows, per structural variable: (row, coefficient).
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> row_rhs_;
  std::vector<Sense> row_sense_;

  std::vector<double> lower_, upper_;  // all variables (structural, then slacks)
  std::vector<VarStatus> status_;
  std::vector<int> basis_;       // variable basic in each row slot
  std::vector<int> basic_slot_;  // var -> slot, -1 when nonbasic
  std::vector<double> x_basic_;  // aligned with basis_

  // Row-major basis inverse with stride binv_cap_.
  std::vector<double> binv_;
  std::size_t binv_cap_ = 0;

  long total_iterations_ = 0;

  mutable std::vector<double> work_y_, work_w_, work_weights_;
};

}  // namespace fairalloc::lp
