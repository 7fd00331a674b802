#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairalloc/analysis.hpp"
#include "fairalloc/fit.hpp"
#include "fairalloc/model.hpp"
#include "fairalloc/solver.hpp"

namespace fairalloc::io {

using json = nlohmann::json;

/// A parsed units file. Required columns: id, group, lon, lat, counselors,
/// ap_ib, calculus, outcome. Extra columns become auxiliary features.
/// Unit features are [counselors, ap_ib, extras...] in that order.
struct LoadedUnits {
  std::vector<Unit> units;
  GroupDomain groups;
  std::vector<std::string> feature_names;
  std::vector<double> ap_ib, counselors, calculus, outcome;

  std::size_t size() const { return units.size(); }
};

LoadedUnits load_units(const std::string& path, const std::string& group_column = "group",
                       const std::vector<std::string>& prec_features = {"ap_ib", "counselors"});
LoadedUnits load_units_stream(std::istream& in, const std::string& group_column,
                              const std::vector<std::string>& prec_features);

void write_units_csv(const LoadedUnits& data, std::ostream& out);

struct RunConfig {
  int k = 5;
  bool include_self = true;
  int budget = 25;
  std::vector<double> tau_list;  // "inf" in JSON maps to +infinity
  std::string group_column = "group";
  std::vector<std::string> prec_feature_list = {"ap_ib", "counselors"};
  std::string model_kind = "max_interference";
  json model_params;       // kind-specific spec (may carry its own "kind")
  json privilege_params;   // optional restricted-model override
  std::string model_file;  // alternative to inline model_params
  SolverConfig solver;
  std::uint64_t seed = 1;
  std::optional<double> self_similarity;

  static RunConfig from_json(const json& j);
  static RunConfig from_file(const std::string& path);
  json to_json() const;
};

/// Parses "inf" (any case) or a positive number.
double parse_tau(const std::string& text);

/// Builds a model from a JSON spec:
///   {"kind":"max_interference","params":{...},"p_feature":...,"f_feature":...}
///   {"kind":"linear_interference","feature_weights":{...},...}
///   {"kind":"tabular","values":[[[...]]]}
/// Group-keyed objects are resolved against `groups` by label.
std::shared_ptr<const StructuralOutcomeModel> model_from_json(
    const json& spec, const GroupDomain& groups, const std::vector<std::string>& feature_names);

AllocationProblem build_problem(const LoadedUnits& data, const RunConfig& config, double tau);

FitDataset build_fit_dataset(const LoadedUnits& data, const RunConfig& config);

struct SyntheticInstance {
  LoadedUnits data;
  json model_spec;  // ground-truth generating model
  KnnOptions graph_options;
  int budget = 0;
  std::vector<double> tau_list;  // suggested taus (empty: caller's choice)
};

/// kinds: housing | housing_interference | additive_infeasible | nyc_like | random.
/// Identical (kind, params, seed) produce identical instances.
SyntheticInstance generate_synthetic(const std::string& kind, const json& params,
                                     std::uint64_t seed);

/// Ready-to-run config mirroring a synthetic instance.
json synthetic_config(const SyntheticInstance& instance, std::uint64_t seed);

json solution_to_json(const AllocationProblem& problem, double tau, const Solution& solution);
json summary_to_json(const AllocationProblem& problem, const Solution& solution,
                     const GroupAllocationSummary& summary);
json fit_to_json(const GroupDomain& groups, const FitResult& result);
void write_path_csv(const AllocationProblem& problem, const SolutionPath& path, std::ostream& out);

}  // namespace fairalloc::io
