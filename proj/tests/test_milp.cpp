#include <random>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "fairalloc/milp.hpp"

using namespace fairalloc;
using test_support::housing_problem;
using test_support::make_unit;
using test_support::random_problem;

namespace {

int count_rows(const MilpProgram& p, RowKind kind) {
  int c = 0;
  for (const auto& row : p.rows)
    if (row.kind == kind) ++c;
  return c;
}

// One-unit problem whose only neighbor is itself.
AllocationProblem single_unit_problem(double tau) {
  AllocationProblem p;
  p.groups.labels = {"b", "w"};
  p.units = {test_support::make_unit("u", 0, 0.0, 0.0, {1.0})};
  p.graph = build_knn_graph(p.units, {1, true, std::nullopt});
  auto model = std::make_shared<LinearInterferenceModel>(
      std::vector<double>{1.0}, std::vector<double>{0.0, 0.0}, 2.0, std::vector<double>{0.0, 1.0},
      std::vector<double>{0.0, 0.0});
  p.objective_model = model;
  p.privilege_model = model;
  p.budget = 1;
  p.tau = tau;
  return p;
}

}  // namespace

TEST_CASE("pattern enumeration") {
  const auto m1 = enumerate_patterns(1);
  REQUIRE(m1.rows.size() == 2);
  CHECK(m1.rows[0].bits == std::vector<std::uint8_t>{0});
  CHECK(m1.rows[1].bits == std::vector<std::uint8_t>{1});

  const auto m2 = enumerate_patterns(2);
  REQUIRE(m2.rows.size() == 4);
  CHECK(m2.rows[0].bits == std::vector<std::uint8_t>{0, 0});
  CHECK(m2.rows[1].bits == std::vector<std::uint8_t>{0, 1});
  CHECK(m2.rows[2].bits == std::vector<std::uint8_t>{1, 0});
  CHECK(m2.rows[3].bits == std::vector<std::uint8_t>{1, 1});

  CHECK(enumerate_patterns(5).rows.size() == 32);
  CHECK_THROWS_AS(enumerate_patterns(0), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_patterns(13), std::invalid_argument);

  // rank round trip
  for (std::size_t r = 0; r < 32; ++r) CHECK(pattern_rank(enumerate_patterns(5).rows[r]) == r);
}

TEST_CASE("single unit program has the expected shape") {
  const auto prog = encode(single_unit_problem(0.7));
  CHECK(prog.n_z == 1);
  CHECK(prog.n_h == 2);
  CHECK(count_rows(prog, RowKind::kLink) == 2);
  CHECK(count_rows(prog, RowKind::kOneHot) == 1);
  CHECK(count_rows(prog, RowKind::kBudget) == 1);
  CHECK(count_rows(prog, RowKind::kPrivilege) == 1);  // |A| - 1

  // objective flows through h only
  CHECK(prog.objective[0] == 0.0);
  CHECK(prog.objective[prog.h_index(0, 0)] == doctest::Approx(1.0));
  CHECK(prog.objective[prog.h_index(0, 1)] == doctest::Approx(3.0));
}

TEST_CASE("program size formulas hold exactly") {
  // 4 units, K = 3, 3 groups
  AllocationProblem p;
  p.groups.labels = {"a", "b", "c"};
  for (int i = 0; i < 4; ++i)
    p.units.push_back(make_unit(std::to_string(i), i % 3, 1.7 * i, 0.3 * i * i, {0.5, 1.0}));
  p.graph = build_knn_graph(p.units, {3, true, std::nullopt});
  SEMParamsByGroup params;
  params.alpha = {0.1, 0.2, 0.3};
  params.beta = {0.05, 0.06, 0.07};
  params.gamma = {0.01, 0.02, 0.03};
  params.theta = {0.4, 0.5, 0.6};
  auto model = std::make_shared<MaxInterferenceModel>(params, 0, 1);
  p.objective_model = model;
  p.privilege_model = model;
  p.budget = 2;
  p.tau = 0.25;

  const auto prog = encode(p);
  const std::size_t n = 4, K = 3, A = 3;
  CHECK(prog.n_h == n * (1u << K));
  CHECK(count_rows(prog, RowKind::kLink) == static_cast<int>(n * (1u << K) * K));
  CHECK(count_rows(prog, RowKind::kOneHot) == static_cast<int>(n));
  CHECK(count_rows(prog, RowKind::kPrivilege) == static_cast<int>(n * (A - 1)));
  CHECK(count_rows(prog, RowKind::kBudget) == 1);

  SUBCASE("tau = inf drops the privilege rows") {
    p.tau = infinity();
    CHECK(count_rows(encode(p), RowKind::kPrivilege) == 0);
  }
}

TEST_CASE("H-determination and decode, exhaustively on a small instance") {
  auto p = test_support::additive_problem(3, infinity(), 3);
  const auto prog = encode(p);
  for (unsigned mask = 0; mask < 8; ++mask) {
    std::vector<std::uint8_t> z = {static_cast<std::uint8_t>(mask >> 2 & 1),
                                   static_cast<std::uint8_t>(mask >> 1 & 1),
                                   static_cast<std::uint8_t>(mask & 1)};
    // build the full variable vector implied by z
    std::vector<double> values(prog.var_count(), 0.0);
    for (std::size_t i = 0; i < 3; ++i) values[i] = z[i];
    for (std::size_t i = 0; i < 3; ++i) {
      const auto rank = pattern_rank(neighbor_pattern(p.graph, z, i));
      values[prog.h_index(i, static_cast<int>(rank))] = 1.0;
    }
    const auto point = decode(prog, values);
    CHECK(point.z == z);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto rank = pattern_rank(neighbor_pattern(p.graph, z, i));
      for (int j = 0; j < prog.pattern_count[i]; ++j)
        CHECK(point.h[i][static_cast<std::size_t>(j)] ==
              (j == static_cast<int>(rank) ? 1 : 0));
    }

    // flipping any single h selection violates linking or one-hot
    auto bad = values;
    const auto rank0 = pattern_rank(neighbor_pattern(p.graph, z, 0));
    bad[prog.h_index(0, static_cast<int>(rank0))] = 0.0;
    bad[prog.h_index(0, static_cast<int>(rank0 ^ 1u))] = 1.0;
    CHECK_THROWS_AS(decode(prog, bad), std::invalid_argument);
  }
}

TEST_CASE("decode rejects fractional values") {
  const auto prog = encode(single_unit_problem(infinity()));
  std::vector<double> values(prog.var_count(), 0.0);
  values[prog.h_index(0, 0)] = 1.0;
  CHECK_NOTHROW(decode(prog, values));
  values[0] = 0.5;
  CHECK_THROWS_WITH_AS(decode(prog, values), doctest::Contains("non-integral"),
                       std::invalid_argument);
}

TEST_CASE("MILP objective at (z, H(z)) equals evaluate_policy") {
  std::mt19937_64 eng(101);
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto p = random_problem(seed);
    const auto prog = encode(p);
    for (int rep = 0; rep < 25; ++rep) {
      std::vector<std::uint8_t> z(p.size());
      for (auto& b : z) b = eng() & 1;
      const double via_milp = objective_at(prog, p.graph, z);
      const double via_model = evaluate_policy(p, z).total;
      // same model evaluations, same summation order: exact agreement
      CHECK(via_milp == via_model);
    }
  }
}

TEST_CASE("privilege row coefficients equal model-core gaps") {
  for (std::uint64_t seed : {2u, 5u, 9u}) {
    const auto p = random_problem(seed, 0.4);
    const auto prog = encode(p);
    for (const auto& row : prog.rows) {
      if (row.kind != RowKind::kPrivilege) continue;
      for (const auto& [var, coef] : row.terms) {
        const auto [unit, pattern] = prog.h_location(static_cast<std::size_t>(var));
        const auto pat = pattern_from_rank(static_cast<std::size_t>(pattern),
                                           p.graph.degree(unit));
        CHECK(coef == privilege_gap(p, unit, row.aux, pat));
      }
      CHECK(row.rhs == p.tau);
    }
  }
}

TEST_CASE("text export shape") {
  const auto prog = encode(single_unit_problem(0.7));
  std::ostringstream out;
  export_text(prog, out);
  const std::string text = out.str();
  CHECK(text.rfind("MAXIMIZE\n", 0) == 0);
  CHECK(text.find("h_u_0") != std::string::npos);
  CHECK(text.find("z_u") != std::string::npos);
  CHECK(text.find("onehot_u: ") != std::string::npos);
  CHECK(text.find("budget: ") != std::string::npos);
  CHECK(text.find(" = 1") != std::string::npos);
  CHECK(text.find("BINARY") != std::string::npos);
}
