#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fairalloc/model.hpp"
#include "fairalloc/solver.hpp"

namespace fairalloc {

/// Exhaustive oracle: enumerates every allocation with sum(z) <= B in
/// lexicographic z order, evaluating feasibility and objective through
/// model-core only. Returns the lexicographically smallest maximizer.
/// Guarded to n <= 22 and at most 10^7 candidate subsets.
Solution brute_force(const AllocationProblem& problem);

struct SolutionPath {
  std::vector<std::pair<double, Solution>> points;  // (tau, solution), tau increasing
  int budget = 0;
  std::uint64_t fingerprint = 0;  // hash of the problem inputs
};

/// One cold solve per tau; taus must be strictly increasing and positive
/// (+inf sentinel allowed as the last entry).
SolutionPath solution_path(const AllocationProblem& problem, const std::vector<double>& taus,
                           const SolverConfig& config = {});

/// Geometric tau grid between an infeasibility-threshold estimate and the
/// smallest tau at which the unconstrained optimum becomes feasible.
std::vector<double> suggest_tau_grid(const AllocationProblem& problem, int count,
                                     const SolverConfig& config = {});

struct GroupAllocationSummary {
  std::vector<int> treated_per_group;            // |A| counts, sum == budget used
  std::vector<double> outcome_total_per_group;   // expected outcome under z, by group
  double objective = 0.0;
  std::vector<std::size_t> treated_units;        // unit indices with z = 1
};

/// Requires a solution carrying an incumbent.
GroupAllocationSummary group_allocation_summary(const AllocationProblem& problem,
                                                const Solution& solution);

/// Stable fingerprint of the instance: units, graph, budget and a sample of
/// model evaluations (so different models hash differently).
std::uint64_t problem_fingerprint(const AllocationProblem& problem);

}  // namespace fairalloc
