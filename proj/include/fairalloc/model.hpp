#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "fairalloc/graph.hpp"
#include "fairalloc/types.hpp"

namespace fairalloc {

/// Absolute tolerance used in every feasibility check (budget and privilege
/// rows). Strict "<" constraints from the problem statement are realized as
/// "<= tau" with this slack.
inline constexpr double kFeasibilityTol = 1e-9;

inline double infinity() { return std::numeric_limits<double>::infinity(); }

/// Evaluates E[Y_i | group, features, neighbor intervention pattern].
///
/// `group` overrides the unit's factual label for counterfactual evaluation:
/// only the group-indexed coefficients are re-indexed, features and neighbor
/// attributes stay factual. Evaluation is deterministic and total over valid
/// inputs.
class StructuralOutcomeModel {
 public:
  virtual ~StructuralOutcomeModel() = default;

  virtual double expected_outcome(const std::vector<Unit>& units, std::size_t i, int group,
                                  const NeighborPattern& pattern,
                                  const InterferenceGraph& graph) const = 0;

  virtual std::size_t group_count() const = 0;
};

/// Max-interference structural equation:
///   alpha[a] * max_{slot active} s(i,j)
/// + beta[a]  * max_{j in N(i)} s(i,j) * p_j
/// + gamma[a] * f_i + theta[a]
/// The first max over an empty active set is 0.
class MaxInterferenceModel final : public StructuralOutcomeModel {
 public:
  MaxInterferenceModel(SEMParamsByGroup params, int p_feature, int f_feature);

  double expected_outcome(const std::vector<Unit>& units, std::size_t i, int group,
                          const NeighborPattern& pattern,
                          const InterferenceGraph& graph) const override;
  std::size_t group_count() const override { return params_.group_count(); }

  const SEMParamsByGroup& params() const { return params_; }
  int p_feature() const { return p_feature_; }
  int f_feature() const { return f_feature_; }

 private:
  SEMParamsByGroup params_;
  int p_feature_;  // feature column holding the AP/IB indicator
  int f_feature_;  // feature column holding the counselor count
};

/// Linear structural equation with an optional idle-spillover penalty:
///   sum_f w_f x_{i,f} + intercept[a] + (z_coef + z_group_bonus[a]) * z_i
/// + I(z_i = 0) * sum_{j in N(i)} z_j * idle_spillover[a_j]
/// Own-intervention terms read z_i from the unit's self slot, so the graph
/// must include i in N(i) whenever z_coef, z_group_bonus or idle_spillover
/// are nonzero.
class LinearInterferenceModel final : public StructuralOutcomeModel {
 public:
  LinearInterferenceModel(std::vector<double> feature_weights, std::vector<double> group_intercept,
                          double z_coef, std::vector<double> z_group_bonus,
                          std::vector<double> idle_spillover);

  double expected_outcome(const std::vector<Unit>& units, std::size_t i, int group,
                          const NeighborPattern& pattern,
                          const InterferenceGraph& graph) const override;
  std::size_t group_count() const override { return group_intercept_.size(); }

  const std::vector<double>& feature_weights() const { return feature_weights_; }

  bool has_own_intervention_terms() const;

 private:
  std::vector<double> feature_weights_;
  std::vector<double> group_intercept_;
  double z_coef_;
  std::vector<double> z_group_bonus_;
  std::vector<double> idle_spillover_;
};

/// Explicit lookup table values[i][a][pattern_rank]; test workhorse.
class TabularModel final : public StructuralOutcomeModel {
 public:
  TabularModel(std::vector<std::vector<std::vector<double>>> values, std::size_t group_count);

  double expected_outcome(const std::vector<Unit>& units, std::size_t i, int group,
                          const NeighborPattern& pattern,
                          const InterferenceGraph& graph) const override;
  std::size_t group_count() const override { return group_count_; }

  const std::vector<std::vector<std::vector<double>>>& values() const { return values_; }

 private:
  std::vector<std::vector<std::vector<double>>> values_;
  std::size_t group_count_;
};

/// A budgeted allocation instance: who may be treated, how interference
/// flows, and which privilege bound applies. Immutable after construction.
struct AllocationProblem {
  std::vector<Unit> units;
  InterferenceGraph graph;
  GroupDomain groups;
  std::shared_ptr<const StructuralOutcomeModel> objective_model;  // uses full X_i
  std::shared_ptr<const StructuralOutcomeModel> privilege_model;  // restricted model
  int budget = 0;
  double tau = std::numeric_limits<double>::infinity();  // +inf drops the constraints

  std::size_t size() const { return units.size(); }

  /// Checks invariants and evaluates both models on every unit once.
  void validate() const;
};

/// G_{i,a'}: privilege-model outcome at the factual group minus at a',
/// same pattern and features both times.
double privilege_gap(const AllocationProblem& problem, std::size_t i, int a_prime,
                     const NeighborPattern& pattern);

struct PolicyReport {
  double total = 0.0;
  std::vector<double> unit_outcomes;
  std::vector<std::vector<double>> gaps;  // n x |A|; gaps[i][a_i] == 0
  int budget_used = 0;
  bool feasible = false;
};

/// Direct evaluation of a fixed allocation: objective, per-unit outcomes and
/// gaps, and feasibility against budget and tau.
PolicyReport evaluate_policy(const AllocationProblem& problem, const std::vector<std::uint8_t>& z);

}  // namespace fairalloc
