#include "fairalloc/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fairalloc {

namespace {

void check_eval_args(const std::vector<Unit>& units, std::size_t i, int group,
                     const NeighborPattern& pattern, const InterferenceGraph& graph,
                     std::size_t group_count) {
  if (i >= units.size()) throw std::out_of_range("model: unit index out of range");
  if (group < 0 || static_cast<std::size_t>(group) >= group_count)
    throw std::out_of_range("model: group index out of range");
  if (pattern.bits.size() != graph.degree(i))
    throw std::invalid_argument("model: pattern length != |N(i)| for unit " +
                                units[i].id);
}

double feature_at(const Unit& u, int idx, const char* what) {
  if (idx < 0 || static_cast<std::size_t>(idx) >= u.features.size())
    throw std::invalid_argument(std::string("model: ") + what + " feature index out of range");
  return u.features[static_cast<std::size_t>(idx)];
}

}  // namespace

MaxInterferenceModel::MaxInterferenceModel(SEMParamsByGroup params, int p_feature, int f_feature)
    : params_(std::move(params)), p_feature_(p_feature), f_feature_(f_feature) {
  params_.validate();
}

double MaxInterferenceModel::expected_outcome(const std::vector<Unit>& units, std::size_t i,
                                              int group, const NeighborPattern& pattern,
                                              const InterferenceGraph& graph) const {
  check_eval_args(units, i, group, pattern, graph, group_count());
  const auto a = static_cast<std::size_t>(group);
  const auto& nb = graph.neighbors[i];
  const auto& sim = graph.sims[i];

  double funded_max = 0.0;  // empty active set contributes 0
  double apib_max = 0.0;
  for (std::size_t s = 0; s < nb.size(); ++s) {
    if (pattern.bits[s]) funded_max = std::max(funded_max, sim[s]);
    const double p_j = feature_at(units[static_cast<std::size_t>(nb[s])], p_feature_, "p");
    apib_max = std::max(apib_max, sim[s] * p_j);
  }
  const double f_i = feature_at(units[i], f_feature_, "f");
  return params_.alpha[a] * funded_max + params_.beta[a] * apib_max + params_.gamma[a] * f_i +
         params_.theta[a];
}

LinearInterferenceModel::LinearInterferenceModel(std::vector<double> feature_weights,
                                                 std::vector<double> group_intercept,
                                                 double z_coef, std::vector<double> z_group_bonus,
                                                 std::vector<double> idle_spillover)
    : feature_weights_(std::move(feature_weights)),
      group_intercept_(std::move(group_intercept)),
      z_coef_(z_coef),
      z_group_bonus_(std::move(z_group_bonus)),
      idle_spillover_(std::move(idle_spillover)) {
  const std::size_t g = group_intercept_.size();
  if (z_group_bonus_.size() != g || idle_spillover_.size() != g)
    throw std::invalid_argument("linear model: per-group arrays must share one length");
}

bool LinearInterferenceModel::has_own_intervention_terms() const {
  if (z_coef_ != 0.0) return true;
  for (double b : z_group_bonus_)
    if (b != 0.0) return true;
  for (double d : idle_spillover_)
    if (d != 0.0) return true;
  return false;
}

double LinearInterferenceModel::expected_outcome(const std::vector<Unit>& units, std::size_t i,
                                                 int group, const NeighborPattern& pattern,
                                                 const InterferenceGraph& graph) const {
  check_eval_args(units, i, group, pattern, graph, group_count());
  const auto a = static_cast<std::size_t>(group);
  const Unit& u = units[i];

  double y = group_intercept_[a];
  const std::size_t nf = std::min(feature_weights_.size(), u.features.size());
  for (std::size_t f = 0; f < nf; ++f) y += feature_weights_[f] * u.features[f];

  const int self = graph.self_slot(i);
  if (self < 0) {
    if (has_own_intervention_terms())
      throw std::invalid_argument("linear model: unit " + u.id +
                                  " has no self slot; build the graph with include_self");
    return y;
  }
  const double z_i = pattern.bits[static_cast<std::size_t>(self)] ? 1.0 : 0.0;
  y += (z_coef_ + z_group_bonus_[a]) * z_i;

  if (z_i == 0.0) {
    const auto& nb = graph.neighbors[i];
    double spill = 0.0;
    for (std::size_t s = 0; s < nb.size(); ++s) {
      if (!pattern.bits[s]) continue;
      const Unit& v = units[static_cast<std::size_t>(nb[s])];
      spill += idle_spillover_[static_cast<std::size_t>(v.group)];
    }
    y += spill;
  }
  return y;
}

TabularModel::TabularModel(std::vector<std::vector<std::vector<double>>> values,
                           std::size_t group_count)
    : values_(std::move(values)), group_count_(group_count) {
  for (const auto& per_unit : values_) {
    if (per_unit.size() != group_count_)
      throw std::invalid_argument("tabular model: missing group slice");
  }
}

double TabularModel::expected_outcome(const std::vector<Unit>& units, std::size_t i, int group,
                                      const NeighborPattern& pattern,
                                      const InterferenceGraph& graph) const {
  check_eval_args(units, i, group, pattern, graph, group_count_);
  const auto& row = values_[i][static_cast<std::size_t>(group)];
  const std::size_t r = pattern_rank(pattern);
  if (r >= row.size()) throw std::invalid_argument("tabular model: pattern outside table");
  return row[r];
}

void AllocationProblem::validate() const {
  groups.validate();
  graph.validate();
  if (graph.unit_count() != units.size())
    throw std::invalid_argument("problem: graph size != unit count");
  if (!objective_model || !privilege_model) throw std::invalid_argument("problem: missing model");
  if (objective_model->group_count() != groups.size() ||
      privilege_model->group_count() != groups.size())
    throw std::invalid_argument("problem: model group count != |A|");
  if (budget < 0 || static_cast<std::size_t>(budget) > units.size())
    throw std::invalid_argument("problem: budget must lie in [0, n]");
  if (std::isnan(tau) || tau <= 0.0)
    throw std::invalid_argument("problem: tau must be positive (or +inf)");
  for (std::size_t i = 0; i < units.size(); ++i) {
    units[i].validate(groups.size());
    NeighborPattern idle;
    idle.bits.assign(graph.degree(i), 0);
    objective_model->expected_outcome(units, i, units[i].group, idle, graph);
    for (std::size_t a = 0; a < groups.size(); ++a)
      privilege_model->expected_outcome(units, i, static_cast<int>(a), idle, graph);
  }
}

double privilege_gap(const AllocationProblem& problem, std::size_t i, int a_prime,
                     const NeighborPattern& pattern) {
  const int a_i = problem.units[i].group;
  const double factual =
      problem.privilege_model->expected_outcome(problem.units, i, a_i, pattern, problem.graph);
  const double counterfactual =
      problem.privilege_model->expected_outcome(problem.units, i, a_prime, pattern, problem.graph);
  return factual - counterfactual;
}

PolicyReport evaluate_policy(const AllocationProblem& problem, const std::vector<std::uint8_t>& z) {
  const std::size_t n = problem.size();
  if (z.size() != n) throw std::invalid_argument("evaluate_policy: z length != n");

  PolicyReport report;
  report.unit_outcomes.resize(n);
  report.gaps.assign(n, std::vector<double>(problem.groups.size(), 0.0));

  int used = 0;
  for (std::uint8_t b : z) used += b ? 1 : 0;
  report.budget_used = used;

  bool gaps_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    const NeighborPattern pat = neighbor_pattern(problem.graph, z, i);
    report.unit_outcomes[i] = problem.objective_model->expected_outcome(
        problem.units, i, problem.units[i].group, pat, problem.graph);
    report.total += report.unit_outcomes[i];
    for (std::size_t a = 0; a < problem.groups.size(); ++a) {
      const double gap = privilege_gap(problem, i, static_cast<int>(a), pat);
      report.gaps[i][a] = gap;
      if (gap > problem.tau + kFeasibilityTol) gaps_ok = false;
    }
  }
  report.feasible = gaps_ok && used <= problem.budget;
  return report;
}

}  // namespace fairalloc
