#pragma once

#include <cstddef>
#include <vector>

#include "fairalloc/graph.hpp"
#include "fairalloc/types.hpp"

namespace fairalloc {

/// Observed data for fitting the max-interference SEM: one row per unit plus
/// the interference graph the regressors are computed on.
struct FitDataset {
  std::vector<int> group;
  std::vector<double> ap_ib;       // p_i in {0,1}
  std::vector<double> counselors;  // f_i >= 0
  std::vector<double> calculus;    // observed c_i in {0,1}
  std::vector<double> outcome;     // y_i
  InterferenceGraph graph;
  GroupDomain groups;

  std::size_t size() const { return group.size(); }
  void validate() const;
};

struct FitResult {
  SEMParamsByGroup params;
  std::vector<double> residual_variance;  // per group: RSS / n_a
  std::vector<int> n_per_group;
  SEMParamsByGroup std_errors;  // OLS standard errors, same per-group layout
};

/// Group-wise ordinary least squares of y on
///   [max_{j in N(i), c_j=1} s(i,j),  max_{j in N(i)} s(i,j) p_j,  f_i,  1],
/// which is the Gaussian MLE for the max-interference SEM. Throws on groups
/// with fewer than 4 units or a rank-deficient design (naming the group and
/// the collinear regressors).
FitResult fit_max_interference(const FitDataset& data);

/// The four regressor values of unit i on the observed (pre-intervention)
/// world. Exposed for tests and diagnostics.
std::array<double, 4> fit_regressors(const FitDataset& data, std::size_t i);

}  // namespace fairalloc
