#include <random>

#include "doctest.h"
#include "test_support.hpp"

#include "fairalloc/fit.hpp"

using namespace fairalloc;
using test_support::make_unit;

namespace {

struct MadeData {
  FitDataset data;
  SEMParamsByGroup truth;
};

// Noiseless dataset generated from known parameters on random geometry.
MadeData make_fit_data(std::uint64_t seed, int n, int n_groups, double noise_sigma = 0.0) {
  std::mt19937_64 eng(seed);
  auto uniform = [&](double a, double b) {
    return a + (b - a) * (static_cast<double>(eng() >> 11) * 0x1.0p-53);
  };
  std::normal_distribution<double> gauss(0.0, 1.0);

  MadeData made;
  FitDataset& d = made.data;
  for (int g = 0; g < n_groups; ++g) d.groups.labels.push_back("g" + std::to_string(g));

  std::vector<Unit> units;
  for (int i = 0; i < n; ++i) {
    units.push_back(make_unit(std::to_string(i), static_cast<int>(eng() % static_cast<unsigned>(n_groups)),
                              uniform(0.0, 50.0), uniform(0.0, 50.0)));
    d.group.push_back(units.back().group);
    d.ap_ib.push_back(eng() % 2 ? 1.0 : 0.0);
    d.counselors.push_back(uniform(0.0, 6.0));
    d.calculus.push_back(eng() % 5 < 2 ? 1.0 : 0.0);
  }
  d.graph = build_knn_graph(units, {std::min(5, n), true, std::nullopt});

  for (int g = 0; g < n_groups; ++g) {
    made.truth.alpha.push_back(uniform(0.2, 1.5));
    made.truth.beta.push_back(uniform(0.1, 1.0));
    made.truth.gamma.push_back(uniform(0.05, 0.4));
    made.truth.theta.push_back(uniform(-1.0, 1.0));
  }
  for (int i = 0; i < n; ++i) {
    const auto x = fit_regressors(d, static_cast<std::size_t>(i));
    const auto a = static_cast<std::size_t>(d.group[static_cast<std::size_t>(i)]);
    double y = made.truth.alpha[a] * x[0] + made.truth.beta[a] * x[1] + made.truth.gamma[a] * x[2] +
               made.truth.theta[a];
    if (noise_sigma > 0.0) y += noise_sigma * gauss(eng);
    d.outcome.push_back(y);
  }
  return made;
}

}  // namespace

TEST_CASE("noiseless generate-then-fit recovers the truth") {
  const auto made = make_fit_data(3, 90, 2);
  const auto fit = fit_max_interference(made.data);
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(fit.params.alpha[a] == doctest::Approx(made.truth.alpha[a]).epsilon(1e-8));
    CHECK(fit.params.beta[a] == doctest::Approx(made.truth.beta[a]).epsilon(1e-8));
    CHECK(fit.params.gamma[a] == doctest::Approx(made.truth.gamma[a]).epsilon(1e-8));
    CHECK(fit.params.theta[a] == doctest::Approx(made.truth.theta[a]).epsilon(1e-8));
    CHECK(fit.residual_variance[a] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("all-zero calculus makes the alpha regressor degenerate") {
  auto made = make_fit_data(5, 40, 2);
  std::fill(made.data.calculus.begin(), made.data.calculus.end(), 0.0);
  try {
    fit_max_interference(made.data);
    FAIL("expected a rank-deficiency error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("rank-deficient") != std::string::npos);
    CHECK(msg.find("alpha") != std::string::npos);
  }
}

TEST_CASE("square full-rank system interpolates exactly") {
  // Single group, exactly 4 units with distinct regressor rows.
  auto made = make_fit_data(11, 4, 1);
  const auto fit = fit_max_interference(made.data);
  CHECK(fit.n_per_group[0] == 4);
  CHECK(fit.residual_variance[0] == doctest::Approx(0.0).epsilon(1e-10));
  // predictions match the observed outcomes exactly
  for (std::size_t i = 0; i < 4; ++i) {
    const auto x = fit_regressors(made.data, i);
    const double pred = fit.params.alpha[0] * x[0] + fit.params.beta[0] * x[1] +
                        fit.params.gamma[0] * x[2] + fit.params.theta[0];
    CHECK(pred == doctest::Approx(made.data.outcome[i]).epsilon(1e-8));
  }
}

TEST_CASE("residuals are orthogonal to every regressor column") {
  const auto made = make_fit_data(17, 120, 3, 0.3);
  const auto fit = fit_max_interference(made.data);
  const std::size_t n = made.data.size();
  for (std::size_t a = 0; a < 3; ++a) {
    std::array<double, 4> dot{0, 0, 0, 0};
    std::array<double, 4> scale{0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(made.data.group[i]) != a) continue;
      const auto x = fit_regressors(made.data, i);
      const double pred = fit.params.alpha[a] * x[0] + fit.params.beta[a] * x[1] +
                          fit.params.gamma[a] * x[2] + fit.params.theta[a];
      const double res = made.data.outcome[i] - pred;
      for (int c = 0; c < 4; ++c) {
        dot[static_cast<std::size_t>(c)] += res * x[static_cast<std::size_t>(c)];
        scale[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
      }
    }
    for (int c = 0; c < 4; ++c)
      CHECK(std::abs(dot[static_cast<std::size_t>(c)]) <=
            1e-8 * std::max(1.0, scale[static_cast<std::size_t>(c)]));
  }
}

TEST_CASE("refitting on own predictions reproduces the parameters") {
  const auto made = make_fit_data(23, 80, 2, 0.5);
  const auto first = fit_max_interference(made.data);

  FitDataset refit_data = made.data;
  for (std::size_t i = 0; i < refit_data.size(); ++i) {
    const auto x = fit_regressors(refit_data, i);
    const auto a = static_cast<std::size_t>(refit_data.group[i]);
    refit_data.outcome[i] = first.params.alpha[a] * x[0] + first.params.beta[a] * x[1] +
                            first.params.gamma[a] * x[2] + first.params.theta[a];
  }
  const auto second = fit_max_interference(refit_data);
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(second.params.alpha[a] == doctest::Approx(first.params.alpha[a]).epsilon(1e-9));
    CHECK(second.params.beta[a] == doctest::Approx(first.params.beta[a]).epsilon(1e-9));
    CHECK(second.params.gamma[a] == doctest::Approx(first.params.gamma[a]).epsilon(1e-9));
    CHECK(second.params.theta[a] == doctest::Approx(first.params.theta[a]).epsilon(1e-9));
  }
}

TEST_CASE("fit is invariant to unit order within a group") {
  const auto made = make_fit_data(29, 50, 2, 0.2);
  const auto fit = fit_max_interference(made.data);

  // Reverse the whole dataset; regressors travel with their units because
  // the graph is rebuilt over the same geometry.
  FitDataset rev;
  rev.groups = made.data.groups;
  const std::size_t n = made.data.size();
  std::vector<Unit> units;
  for (std::size_t i = n; i-- > 0;) {
    rev.group.push_back(made.data.group[i]);
    rev.ap_ib.push_back(made.data.ap_ib[i]);
    rev.counselors.push_back(made.data.counselors[i]);
    rev.calculus.push_back(made.data.calculus[i]);
    rev.outcome.push_back(made.data.outcome[i]);
  }
  // mirror the neighbor structure under the index reversal
  rev.graph = made.data.graph;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = n - 1 - i;
    rev.graph.neighbors[i].clear();
    for (int j : made.data.graph.neighbors[src])
      rev.graph.neighbors[i].push_back(static_cast<int>(n) - 1 - j);
    rev.graph.sims[i] = made.data.graph.sims[src];
  }
  const auto fit_rev = fit_max_interference(rev);
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(fit_rev.params.alpha[a] == doctest::Approx(fit.params.alpha[a]).epsilon(1e-9));
    CHECK(fit_rev.params.theta[a] == doctest::Approx(fit.params.theta[a]).epsilon(1e-9));
  }
}

TEST_CASE("a group with fewer than four units is rejected") {
  auto made = make_fit_data(31, 40, 2);
  // shrink group 1 to three units
  FitDataset& d = made.data;
  FitDataset small;
  small.groups = d.groups;
  small.graph = d.graph;
  int kept_g1 = 0;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.group[i] == 1 && kept_g1 >= 3) continue;
    if (d.group[i] == 1) ++kept_g1;
    keep.push_back(i);
  }
  // rebuild a consistent graph over the kept units
  std::vector<Unit> units;
  for (std::size_t i : keep) {
    small.group.push_back(d.group[i]);
    small.ap_ib.push_back(d.ap_ib[i]);
    small.counselors.push_back(d.counselors[i]);
    small.calculus.push_back(d.calculus[i]);
    small.outcome.push_back(d.outcome[i]);
    units.push_back(make_unit(std::to_string(i), d.group[i], static_cast<double>(i), 0.0));
  }
  small.graph = build_knn_graph(units, {2, true, std::nullopt});
  CHECK_THROWS_WITH_AS(fit_max_interference(small),
                       doctest::Contains("need at least 4"), std::invalid_argument);
}
