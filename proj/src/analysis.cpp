#include "fairalloc/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace fairalloc {

namespace {

constexpr double kTieTol = 1e-9;

std::uint64_t choose_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  std::uint64_t c = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    c = c * (n - i) / (i + 1);
    if (c > cap) return cap + 1;
  }
  return c;
}

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  constexpr std::uint64_t kPrime = 1099511628211ULL;
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xff;
    h *= kPrime;
  }
}

void fnv_mix(std::uint64_t& h, double v) { fnv_mix(h, std::bit_cast<std::uint64_t>(v)); }

void fnv_mix(std::uint64_t& h, const std::string& s) {
  constexpr std::uint64_t kPrime = 1099511628211ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= kPrime;
  }
  fnv_mix(h, static_cast<std::uint64_t>(s.size()));
}

}  // namespace

Solution brute_force(const AllocationProblem& problem) {
  const std::size_t n = problem.size();
  if (n > 22) throw std::invalid_argument("brute_force: instance too large (n > 22)");
  std::uint64_t subsets = 0;
  for (int b = 0; b <= problem.budget; ++b) {
    subsets += choose_capped(n, static_cast<std::uint64_t>(b), 10'000'000);
    if (subsets > 10'000'000)
      throw std::invalid_argument("brute_force: too many candidate subsets (> 1e7)");
  }

  const std::size_t n_groups = problem.groups.size();
  const bool check_gaps = std::isfinite(problem.tau);

  Solution best;
  best.status = SolveStatus::kInfeasible;
  bool found = false;
  double best_value = 0.0;
  std::vector<std::uint8_t> z(n, 0);
  long evaluated = 0;

  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    if (std::popcount(mask) > problem.budget) continue;
    // z_0 is the most significant bit, so ascending masks walk z in
    // lexicographic order and the first maximizer found is the smallest.
    for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<std::uint8_t>((mask >> (n - 1 - i)) & 1u);
    ++evaluated;

    bool feasible = true;
    double total = 0.0;
    for (std::size_t i = 0; i < n && feasible; ++i) {
      const NeighborPattern pat = neighbor_pattern(problem.graph, z, i);
      total += problem.objective_model->expected_outcome(problem.units, i, problem.units[i].group,
                                                         pat, problem.graph);
      if (!check_gaps) continue;
      for (std::size_t a = 0; a < n_groups; ++a) {
        if (privilege_gap(problem, i, static_cast<int>(a), pat) >
            problem.tau + kFeasibilityTol) {
          feasible = false;
          break;
        }
      }
    }
    if (!feasible) continue;
    if (!found || total > best_value + kTieTol) {
      found = true;
      best_value = total;
      best.z = z;
    }
  }

  best.nodes_explored = evaluated;
  if (!found) {
    best.objective = -std::numeric_limits<double>::infinity();
    best.bound = -std::numeric_limits<double>::infinity();
    return best;
  }
  best.status = SolveStatus::kOptimal;
  best.objective = best_value;
  best.bound = best_value;
  best.per_unit_gaps = evaluate_policy(problem, best.z).gaps;
  return best;
}

SolutionPath solution_path(const AllocationProblem& problem, const std::vector<double>& taus,
                           const SolverConfig& config) {
  for (std::size_t t = 0; t < taus.size(); ++t) {
    if (taus[t] <= 0.0 || std::isnan(taus[t]))
      throw std::invalid_argument("solution_path: taus must be positive");
    if (t > 0 && taus[t] <= taus[t - 1])
      throw std::invalid_argument("solution_path: taus must be strictly increasing");
  }

  SolutionPath path;
  path.budget = problem.budget;
  path.fingerprint = problem_fingerprint(problem);
  for (double tau : taus) {
    AllocationProblem p = problem;
    p.tau = tau;
    path.points.emplace_back(tau, solve_problem(p, config));
  }
  return path;
}

std::vector<double> suggest_tau_grid(const AllocationProblem& problem, int count,
                                     const SolverConfig& config) {
  if (count < 2) throw std::invalid_argument("suggest_tau_grid: need at least 2 points");

  // Lower end: the smallest tau for which every unit has at least one
  // pattern within bounds (a necessary feasibility condition).
  double lo = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const auto degree = problem.graph.degree(i);
    for (std::size_t a = 0; a < problem.groups.size(); ++a) {
      if (static_cast<int>(a) == problem.units[i].group) continue;
      double best = std::numeric_limits<double>::infinity();
      const std::size_t n_pat = std::size_t{1} << degree;
      for (std::size_t j = 0; j < n_pat; ++j) {
        best = std::min(best, privilege_gap(problem, i, static_cast<int>(a),
                                            pattern_from_rank(j, degree)));
      }
      lo = std::max(lo, best);
    }
  }

  // Upper end: the worst gap realized by the unconstrained optimum.
  AllocationProblem unconstrained = problem;
  unconstrained.tau = infinity();
  const Solution free_opt = solve_problem(unconstrained, config);
  double hi = 0.0;
  if (free_opt.has_incumbent()) {
    for (const auto& row : free_opt.per_unit_gaps)
      for (double g : row) hi = std::max(hi, g);
  }

  hi = std::max(hi, lo);
  if (hi <= 0.0) {  // no positive gap anywhere; any tau works
    lo = 1e-3;
    hi = 1.0;
  }
  lo = std::max(lo, hi * 1e-3);
  hi *= 1.0 + 1e-6;  // land the top point on the feasible side of the bound

  std::vector<double> grid(static_cast<std::size_t>(count));
  const double ratio = hi / lo;
  for (int p = 0; p < count; ++p)
    grid[static_cast<std::size_t>(p)] =
        lo * std::pow(ratio, static_cast<double>(p) / static_cast<double>(count - 1));
  for (std::size_t p = 1; p < grid.size(); ++p)
    if (grid[p] <= grid[p - 1]) grid[p] = std::nextafter(grid[p - 1], infinity());
  return grid;
}

GroupAllocationSummary group_allocation_summary(const AllocationProblem& problem,
                                                const Solution& solution) {
  if (!solution.has_incumbent())
    throw std::invalid_argument("group_allocation_summary: solution has no incumbent");
  const PolicyReport report = evaluate_policy(problem, solution.z);

  GroupAllocationSummary summary;
  summary.treated_per_group.assign(problem.groups.size(), 0);
  summary.outcome_total_per_group.assign(problem.groups.size(), 0.0);
  summary.objective = report.total;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const auto a = static_cast<std::size_t>(problem.units[i].group);
    summary.outcome_total_per_group[a] += report.unit_outcomes[i];
    if (solution.z[i]) {
      summary.treated_per_group[a] += 1;
      summary.treated_units.push_back(i);
    }
  }
  return summary;
}

std::uint64_t problem_fingerprint(const AllocationProblem& problem) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV offset basis
  fnv_mix(h, static_cast<std::uint64_t>(problem.size()));
  fnv_mix(h, static_cast<std::uint64_t>(problem.budget));
  fnv_mix(h, problem.tau);
  for (const auto& label : problem.groups.labels) fnv_mix(h, label);
  for (const auto& u : problem.units) {
    fnv_mix(h, u.id);
    fnv_mix(h, static_cast<std::uint64_t>(u.group));
    for (double f : u.features) fnv_mix(h, f);
    if (u.coords) {
      fnv_mix(h, (*u.coords)[0]);
      fnv_mix(h, (*u.coords)[1]);
    }
  }
  for (std::size_t i = 0; i < problem.graph.unit_count(); ++i) {
    for (int j : problem.graph.neighbors[i]) fnv_mix(h, static_cast<std::uint64_t>(j));
    for (double s : problem.graph.sims[i]) fnv_mix(h, s);
  }
  // Sample both models so parameter changes alter the fingerprint.
  for (std::size_t i = 0; i < problem.size(); ++i) {
    NeighborPattern idle;
    idle.bits.assign(problem.graph.degree(i), 0);
    for (std::size_t a = 0; a < problem.groups.size(); ++a) {
      fnv_mix(h, problem.objective_model->expected_outcome(problem.units, i, static_cast<int>(a),
                                                           idle, problem.graph));
      fnv_mix(h, problem.privilege_model->expected_outcome(problem.units, i, static_cast<int>(a),
                                                           idle, problem.graph));
    }
  }
  return h;
}

}  // namespace fairalloc
