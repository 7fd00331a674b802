#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fairalloc/milp.hpp"

namespace fairalloc {

struct SolverConfig {
  double abs_gap_tol = 1e-6;  // 0 requests exact search with lexicographic ties
  long node_limit = 10'000'000;
  double time_limit_seconds = 0.0;  // 0 = unlimited
  std::string branch_rule = "most-fractional";  // ties to lowest z index
  std::ostream* node_log = nullptr;  // one line per node when set
};

enum class SolveStatus : std::uint8_t { kOptimal, kInfeasible, kLimitReached };

const char* to_string(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<std::uint8_t> z;  // empty when no incumbent exists
  double objective = 0.0;       // meaningful only with an incumbent
  double bound = 0.0;           // best proven upper bound at termination
  std::vector<std::vector<double>> per_unit_gaps;  // n x |A| at z
  long nodes_explored = 0;

  bool has_incumbent() const { return !z.empty(); }
};

enum class LpStatus : std::uint8_t { kOptimal, kInfeasible, kCycleGuard };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> values;  // one per program variable
  double objective = 0.0;
};

/// Solves the LP relaxation of the program (all variables in [0,1]) with an
/// optional partial assignment. The objective of a kOptimal result is a
/// valid upper bound on any integral completion of the fixing. Throws if a
/// variable is fixed twice.
LpResult solve_lp(const MilpProgram& program,
                  const std::vector<std::pair<std::size_t, std::uint8_t>>& fixed = {});

/// Exact branch-and-bound over the z variables; h variables follow from z by
/// propagation and the LP. Deterministic: identical inputs and config give
/// identical Solutions. With abs_gap_tol == 0 the search also resolves value
/// ties toward the lexicographically smallest z.
Solution branch_and_bound(const AllocationProblem& problem, const MilpProgram& program,
                          const SolverConfig& config = {});

/// encode() + branch_and_bound() in one call.
Solution solve_problem(const AllocationProblem& problem, const SolverConfig& config = {});

}  // namespace fairalloc
