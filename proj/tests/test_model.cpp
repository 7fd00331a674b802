#include <random>

#include "doctest.h"
#include "test_support.hpp"

using namespace fairalloc;
using test_support::additive_problem;
using test_support::housing_problem;
using test_support::make_unit;
using test_support::random_problem;

namespace {

NeighborPattern bits(std::initializer_list<int> values) {
  NeighborPattern p;
  for (int v : values) p.bits.push_back(static_cast<std::uint8_t>(v));
  return p;
}

}  // namespace

TEST_CASE("linear model reproduces the subsidy arithmetic") {
  auto p = housing_problem(false, infinity());
  // unit 0: group b, qualification 60. N(0) = [0, 1].
  const double treated =
      p.objective_model->expected_outcome(p.units, 0, 0, bits({1, 0}), p.graph);
  CHECK(treated == doctest::Approx(160.0));
  const double idle = p.objective_model->expected_outcome(p.units, 0, 0, bits({0, 0}), p.graph);
  CHECK(idle == doctest::Approx(60.0));  // features pass through at z = 0
  const double w_treated =
      p.objective_model->expected_outcome(p.units, 1, 1, bits({1, 0}), p.graph);
  CHECK(w_treated == doctest::Approx(230.0));  // 80 + 100 + 50
}

TEST_CASE("max model with zeroed interference terms") {
  std::vector<Unit> units = {make_unit("a", 0, 0.0, 0.0, {1.0, 3.0}),
                             make_unit("b", 1, 1.0, 0.0, {0.0, 2.0})};
  const auto graph = build_knn_graph(units, {2, true, std::nullopt});
  SEMParamsByGroup params;
  params.alpha = {0.0, 0.0};
  params.beta = {0.0, 0.0};
  params.gamma = {2.0, 5.0};
  params.theta = {1.0, -1.0};
  MaxInterferenceModel model(params, /*p_feature=*/0, /*f_feature=*/1);
  for (auto pattern : {bits({0, 0}), bits({1, 0}), bits({1, 1})}) {
    CHECK(model.expected_outcome(units, 0, 0, pattern, graph) == doctest::Approx(2.0 * 3.0 + 1.0));
    CHECK(model.expected_outcome(units, 1, 1, pattern, graph) == doctest::Approx(5.0 * 2.0 - 1.0));
  }
}

TEST_CASE("max model interference terms use nearest active similarity") {
  std::vector<Unit> units = {make_unit("a", 0, 0.0, 0.0, {0.0, 0.0}),
                             make_unit("b", 0, 1.0, 0.0, {1.0, 0.0}),
                             make_unit("c", 0, 2.0, 0.0, {0.0, 0.0})};
  const auto graph = build_knn_graph(units, {2, false, std::nullopt});
  SEMParamsByGroup params;
  params.alpha = {1.0, 0.0};
  params.beta = {10.0, 0.0};
  params.gamma = {0.0, 0.0};
  params.theta = {0.0, 0.0};
  MaxInterferenceModel model(params, 0, 1);

  // N(0) = [b (d=1, s=1), c (d=2, s=1/2)]; p_b = 1.
  CHECK(model.expected_outcome(units, 0, 0, bits({0, 0}), graph) == doctest::Approx(10.0));
  CHECK(model.expected_outcome(units, 0, 0, bits({0, 1}), graph) == doctest::Approx(0.5 + 10.0));
  CHECK(model.expected_outcome(units, 0, 0, bits({1, 1}), graph) == doctest::Approx(1.0 + 10.0));
}

TEST_CASE("privilege gap basics") {
  auto p = housing_problem(false, infinity());
  SUBCASE("same group gives exactly zero") {
    for (std::size_t i = 0; i < 2; ++i) {
      for (auto pattern : {bits({0, 0}), bits({0, 1}), bits({1, 0}), bits({1, 1})}) {
        CHECK(privilege_gap(p, i, p.units[i].group, pattern) == 0.0);
      }
    }
  }
  SUBCASE("being in w boosts the treated outcome by 50") {
    // unit 1 is group w; N(1) = [1, 0], so its own bit is slot 0
    CHECK(privilege_gap(p, 1, 0, bits({1, 0})) == doctest::Approx(50.0));
    CHECK(privilege_gap(p, 1, 0, bits({0, 0})) == doctest::Approx(0.0));
  }
}

TEST_CASE("additive instance has constant unit gap 1") {
  auto p = additive_problem(4, 0.5, 2);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int other = p.units[i].group == 0 ? 1 : 0;
    for (int rank = 0; rank < (1 << p.graph.degree(i)); ++rank) {
      const auto pattern = pattern_from_rank(static_cast<std::size_t>(rank), p.graph.degree(i));
      const double expected = p.units[i].group == 0 ? 1.0 : -1.0;
      CHECK(privilege_gap(p, i, other, pattern) == doctest::Approx(expected));
    }
  }
}

TEST_CASE("gap antisymmetry under a factual group swap") {
  auto p = housing_problem(true, infinity());
  for (auto pattern : {bits({0, 0}), bits({1, 0}), bits({0, 1}), bits({1, 1})}) {
    const double gap = privilege_gap(p, 1, 0, pattern);
    auto twin = p;
    twin.units[1].group = 0;  // same features and pattern, factual group flipped
    CHECK(privilege_gap(twin, 1, 1, pattern) == doctest::Approx(-gap));
  }
}

TEST_CASE("evaluate_policy on the subsidy instance") {
  auto p = housing_problem(false, infinity());
  const auto idle = evaluate_policy(p, {0, 0});
  CHECK(idle.total == doctest::Approx(140.0));
  CHECK(idle.budget_used == 0);
  CHECK(idle.feasible);

  const auto treat_b = evaluate_policy(p, {1, 0});
  const auto treat_w = evaluate_policy(p, {0, 1});
  CHECK(treat_b.total == doctest::Approx(240.0));
  CHECK(treat_w.total == doctest::Approx(280.0));
  CHECK(treat_w.total > treat_b.total);  // X_1 < X_2 + 50

  const auto both = evaluate_policy(p, {1, 1});
  CHECK_FALSE(both.feasible);  // budget violation
  CHECK(both.budget_used == 2);

  CHECK_THROWS_AS(evaluate_policy(p, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("evaluate_policy flags privilege violations against tau") {
  auto p = housing_problem(false, 10.0);
  CHECK(evaluate_policy(p, {1, 0}).feasible);        // treating b gives gap -50 and 0
  CHECK_FALSE(evaluate_policy(p, {0, 1}).feasible);  // treating w creates a 50 gap
  p.tau = 50.0;
  CHECK(evaluate_policy(p, {0, 1}).feasible);  // boundary counts as feasible
}

TEST_CASE("outcome depends on z only through the unit's own pattern") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = random_problem(seed);
    std::mt19937_64 eng(seed);
    std::vector<std::uint8_t> z(p.size());
    for (auto& b : z) b = eng() & 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto pattern = neighbor_pattern(p.graph, z, i);
      const double base = p.objective_model->expected_outcome(p.units, i, p.units[i].group,
                                                              pattern, p.graph);
      auto z2 = z;
      for (std::size_t j = 0; j < p.size(); ++j) {
        const auto& nb = p.graph.neighbors[i];
        if (std::find(nb.begin(), nb.end(), static_cast<int>(j)) == nb.end()) z2[j] ^= 1;
      }
      const auto pattern2 = neighbor_pattern(p.graph, z2, i);
      CHECK(p.objective_model->expected_outcome(p.units, i, p.units[i].group, pattern2, p.graph) ==
            base);
    }
  }
}

TEST_CASE("no-interference linear objective is additive over disjoint supports") {
  auto p = additive_problem(6, infinity(), 6);
  const double base = evaluate_policy(p, {0, 0, 0, 0, 0, 0}).total;
  const double left = evaluate_policy(p, {1, 1, 0, 0, 0, 0}).total;
  const double right = evaluate_policy(p, {0, 0, 0, 1, 1, 0}).total;
  const double both = evaluate_policy(p, {1, 1, 0, 1, 1, 0}).total;
  CHECK(both - base == doctest::Approx((left - base) + (right - base)));
}

TEST_CASE("model evaluation errors") {
  auto p = housing_problem(false, infinity());
  CHECK_THROWS_AS(
      p.objective_model->expected_outcome(p.units, 0, 0, bits({1}), p.graph),
      std::invalid_argument);
  CHECK_THROWS_AS(
      p.objective_model->expected_outcome(p.units, 0, 5, bits({0, 0}), p.graph),
      std::out_of_range);

  // own-intervention terms need a self slot
  std::vector<Unit> units = {make_unit("a", 0, 0.0, 0.0), make_unit("b", 0, 1.0, 0.0)};
  const auto graph = build_knn_graph(units, {1, false, std::nullopt});
  LinearInterferenceModel linear({}, {0.0, 0.0}, 1.0, {0.0, 0.0}, {0.0, 0.0});
  CHECK_THROWS_AS(linear.expected_outcome(units, 0, 0, bits({0}), graph), std::invalid_argument);
}

TEST_CASE("problem validation") {
  auto p = housing_problem(false, infinity());
  CHECK_NOTHROW(p.validate());
  p.budget = 3;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.budget = 1;
  p.tau = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.tau = 1.0;
  p.groups.labels = {"b"};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
