#include "doctest.h"
#include "test_support.hpp"

#include "fairalloc/analysis.hpp"

using namespace fairalloc;
using test_support::additive_problem;
using test_support::housing_problem;
using test_support::random_problem;

namespace {
SolverConfig exact_config() {
  SolverConfig c;
  c.abs_gap_tol = 0.0;
  return c;
}
}  // namespace

TEST_CASE("brute force on the housing instance") {
  auto p = housing_problem(false, infinity());
  const auto solution = brute_force(p);
  REQUIRE(solution.status == SolveStatus::kOptimal);
  CHECK(solution.z == std::vector<std::uint8_t>{0, 1});
  CHECK(solution.objective == doctest::Approx(280.0));
}

TEST_CASE("brute force at budget zero") {
  auto p = housing_problem(false, infinity());
  p.budget = 0;
  const auto solution = brute_force(p);
  REQUIRE(solution.status == SolveStatus::kOptimal);
  CHECK(solution.z == std::vector<std::uint8_t>{0, 0});
  CHECK(solution.objective == doctest::Approx(140.0));

  // baseline gaps above tau make even z = 0 infeasible
  auto q = additive_problem(4, 0.3, 0);
  CHECK(brute_force(q).status == SolveStatus::kInfeasible);
}

TEST_CASE("brute force guards its enumeration size") {
  AllocationProblem p = additive_problem(4, 1.0, 2);
  std::vector<Unit> many;
  for (int i = 0; i < 23; ++i)
    many.push_back(test_support::make_unit(std::to_string(i), i % 2, i, 0.0));
  p.units = many;
  CHECK_THROWS_AS(brute_force(p), std::invalid_argument);
}

TEST_CASE("solution path: objectives are non-decreasing in tau") {
  auto p = additive_problem(6, 1.0, 2);
  const auto path = solution_path(p, {0.5, 1.0, 1.5, infinity()}, exact_config());
  REQUIRE(path.points.size() == 4);
  CHECK(path.points[0].second.status == SolveStatus::kInfeasible);
  double prev = -1e300;
  for (const auto& [tau, solution] : path.points) {
    if (solution.status != SolveStatus::kOptimal) continue;
    CHECK(solution.objective >= prev - 1e-9);
    prev = solution.objective;
  }
  // the sentinel point equals the unconstrained optimum
  auto q = p;
  q.tau = infinity();
  CHECK(path.points.back().second.objective ==
        doctest::Approx(solve_problem(q, exact_config()).objective).epsilon(1e-12));
}

TEST_CASE("solution path input validation") {
  auto p = housing_problem(false, infinity());
  CHECK_THROWS_AS(solution_path(p, {0.5, 0.5}, exact_config()), std::invalid_argument);
  CHECK_THROWS_AS(solution_path(p, {-1.0, 0.5}, exact_config()), std::invalid_argument);
  CHECK_THROWS_AS(solution_path(p, {0.0}, exact_config()), std::invalid_argument);
}

TEST_CASE("single sentinel tau gives the unconstrained optimum") {
  auto p = housing_problem(true, infinity());
  const auto path = solution_path(p, {infinity()}, exact_config());
  REQUIRE(path.points.size() == 1);
  CHECK(path.points[0].second.objective ==
        doctest::Approx(solve_problem(p, exact_config()).objective).epsilon(1e-12));
}

TEST_CASE("taus below the additive threshold are all infeasible") {
  auto p = additive_problem(6, 1.0, 2);
  const auto path = solution_path(p, {0.1, 0.5, 0.99}, exact_config());
  for (const auto& [tau, solution] : path.points)
    CHECK(solution.status == SolveStatus::kInfeasible);
}

TEST_CASE("oracle equivalence along a path") {
  for (std::uint64_t seed : {2u, 8u, 14u}) {
    const auto p = random_problem(seed);
    const auto path = solution_path(p, {0.05, 0.5, 5.0, infinity()}, exact_config());
    for (const auto& [tau, solution] : path.points) {
      auto q = p;
      q.tau = tau;
      const auto exact = brute_force(q);
      CHECK(solution.status == exact.status);
      if (exact.status == SolveStatus::kOptimal)
        CHECK(std::abs(solution.objective - exact.objective) <= 1e-9);
    }
  }
}

TEST_CASE("suggested tau grid is increasing and reaches the unconstrained objective") {
  for (std::uint64_t seed : {4u, 9u}) {
    const auto p = random_problem(seed);
    const auto grid = suggest_tau_grid(p, 10, exact_config());
    REQUIRE(grid.size() == 10);
    for (std::size_t t = 1; t < grid.size(); ++t) CHECK(grid[t] > grid[t - 1]);

    auto q = p;
    q.tau = infinity();
    const auto unconstrained = solve_problem(q, exact_config());
    auto top = p;
    top.tau = grid.back();
    const auto at_top = solve_problem(top, exact_config());
    if (unconstrained.status == SolveStatus::kOptimal) {
      REQUIRE(at_top.status == SolveStatus::kOptimal);
      CHECK(std::abs(at_top.objective - unconstrained.objective) <= 1e-9);
    }
  }
}

TEST_CASE("group allocation summary") {
  auto p = additive_problem(6, infinity(), 3);
  const auto solution = solve_problem(p, exact_config());
  REQUIRE(solution.status == SolveStatus::kOptimal);
  const auto summary = group_allocation_summary(p, solution);

  int total = 0;
  for (int c : summary.treated_per_group) total += c;
  int used = 0;
  for (auto b : solution.z) used += b;
  CHECK(total == used);
  CHECK(summary.objective == doctest::Approx(solution.objective).epsilon(1e-12));
  CHECK(summary.treated_units.size() == static_cast<std::size_t>(used));

  SUBCASE("all-zero allocation has empty counts") {
    Solution zero;
    zero.status = SolveStatus::kOptimal;
    zero.z.assign(p.size(), 0);
    const auto s = group_allocation_summary(p, zero);
    for (int c : s.treated_per_group) CHECK(c == 0);
    CHECK(s.treated_units.empty());
  }

  SUBCASE("missing incumbent is an error") {
    Solution none;
    none.status = SolveStatus::kInfeasible;
    CHECK_THROWS_AS(group_allocation_summary(p, none), std::invalid_argument);
  }
}

TEST_CASE("fingerprint tracks the inputs") {
  const auto p = random_problem(3);
  auto q = p;
  CHECK(problem_fingerprint(p) == problem_fingerprint(q));
  q.budget += 1;
  CHECK(problem_fingerprint(p) != problem_fingerprint(q));

  auto r = p;
  r.units[0].features[0] += 0.125;
  CHECK(problem_fingerprint(p) != problem_fingerprint(r));
}
