#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fairalloc/analysis.hpp"
#include "fairalloc/fit.hpp"
#include "fairalloc/io.hpp"
#include "fairalloc/milp.hpp"
#include "fairalloc/solver.hpp"

namespace {

using fairalloc::AllocationProblem;
using fairalloc::Solution;
using fairalloc::SolveStatus;
using fairalloc::io::json;
using fairalloc::io::LoadedUnits;
using fairalloc::io::RunConfig;

int status_exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return 0;
    case SolveStatus::kInfeasible:
      return 2;
    case SolveStatus::kLimitReached:
      return 3;
  }
  return 1;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << contents;
}

void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return RunConfig::from_file(path);
}

double resolve_tau(const RunConfig& config, const std::string& tau_flag) {
  if (!tau_flag.empty()) return fairalloc::io::parse_tau(tau_flag);
  if (config.tau_list.size() == 1) return config.tau_list.front();
  throw std::runtime_error(
      "pass --tau or a single-entry tau_list in the config to pick the constraint level");
}

struct SolveInputs {
  LoadedUnits data;
  AllocationProblem problem;
};

SolveInputs build_inputs(const std::string& units_path, const RunConfig& config, double tau) {
  SolveInputs in{fairalloc::io::load_units(units_path, config.group_column,
                                           config.prec_feature_list),
                 {}};
  in.problem = fairalloc::io::build_problem(in.data, config, tau);
  return in;
}

int run_synth(const std::string& kind, std::uint64_t seed, const std::string& params_text,
              const std::string& out_csv, const std::string& model_out,
              const std::string& config_out) {
  json params;
  if (!params_text.empty()) params = json::parse(params_text);
  const auto instance = fairalloc::io::generate_synthetic(kind, params, seed);

  std::ostringstream csv;
  fairalloc::io::write_units_csv(instance.data, csv);
  write_file(out_csv, csv.str());
  if (!model_out.empty()) write_json(model_out, instance.model_spec);
  if (!config_out.empty())
    write_json(config_out, fairalloc::io::synthetic_config(instance, seed));
  return 0;
}

int run_fit(const std::string& units_path, const std::string& config_path,
            const std::string& out_path) {
  const RunConfig config = load_config(config_path);
  const LoadedUnits data =
      fairalloc::io::load_units(units_path, config.group_column, config.prec_feature_list);
  const fairalloc::FitDataset dataset = fairalloc::io::build_fit_dataset(data, config);
  const fairalloc::FitResult result = fairalloc::fit_max_interference(dataset);
  write_json(out_path, fairalloc::io::fit_to_json(data.groups, result));
  return 0;
}

int run_solve(const std::string& units_path, const std::string& config_path,
              const std::string& tau_flag, const std::string& out_path,
              const std::string& export_milp, bool use_oracle) {
  const RunConfig config = load_config(config_path);
  const double tau = resolve_tau(config, tau_flag);
  SolveInputs in = build_inputs(units_path, config, tau);

  Solution solution;
  if (use_oracle) {
    solution = fairalloc::brute_force(in.problem);
  } else {
    const fairalloc::MilpProgram program = fairalloc::encode(in.problem);
    if (!export_milp.empty()) {
      std::ostringstream text;
      fairalloc::export_text(program, text);
      write_file(export_milp, text.str());
    }
    solution = fairalloc::branch_and_bound(in.problem, program, config.solver);
  }
  if (!out_path.empty())
    write_json(out_path, fairalloc::io::solution_to_json(in.problem, tau, solution));
  std::cout << fairalloc::to_string(solution.status) << "\n";
  return status_exit_code(solution.status);
}

int run_path(const std::string& units_path, const std::string& config_path,
             const std::string& taus_flag, const std::string& out_dir) {
  const RunConfig config = load_config(config_path);
  std::vector<double> taus = config.tau_list;
  if (!taus_flag.empty()) {
    taus.clear();
    std::stringstream ss(taus_flag);
    std::string item;
    while (std::getline(ss, item, ',')) taus.push_back(fairalloc::io::parse_tau(item));
  }
  if (taus.empty()) throw std::runtime_error("path: no taus given (config tau_list or --taus)");

  SolveInputs in = build_inputs(units_path, config, taus.front());
  const fairalloc::SolutionPath path = fairalloc::solution_path(in.problem, taus, config.solver);

  std::filesystem::create_directories(out_dir);
  std::ostringstream csv;
  fairalloc::io::write_path_csv(in.problem, path, csv);
  write_file(out_dir + "/path.csv", csv.str());
  for (std::size_t p = 0; p < path.points.size(); ++p) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu.json", p);
    write_json(out_dir + "/" + name,
               fairalloc::io::solution_to_json(in.problem, path.points[p].first,
                                               path.points[p].second));
  }
  return 0;
}

int run_summarize(const std::string& units_path, const std::string& config_path,
                  const std::string& solution_path, const std::string& out_path) {
  const RunConfig config = load_config(config_path);
  std::ifstream sol_in(solution_path);
  if (!sol_in) throw std::runtime_error("cannot open solution file '" + solution_path + "'");
  json sol_json;
  sol_in >> sol_json;

  const double tau = sol_json.at("tau").is_string() ? fairalloc::infinity()
                                                    : sol_json.at("tau").get<double>();
  SolveInputs in = build_inputs(units_path, config, tau);

  Solution solution;
  const std::string status = sol_json.at("status").get<std::string>();
  solution.status = status == "Optimal"      ? SolveStatus::kOptimal
                    : status == "Infeasible" ? SolveStatus::kInfeasible
                                             : SolveStatus::kLimitReached;
  solution.z.assign(in.problem.size(), 0);
  for (const auto& id : sol_json.at("z")) {
    bool found = false;
    for (std::size_t i = 0; i < in.problem.size(); ++i) {
      if (in.problem.units[i].id == id.get<std::string>()) {
        solution.z[i] = 1;
        found = true;
        break;
      }
    }
    if (!found) throw std::runtime_error("solution names unknown unit id '" +
                                         id.get<std::string>() + "'");
  }
  if (!sol_json.at("objective").is_null()) solution.objective = sol_json.at("objective").get<double>();
  const auto summary = fairalloc::group_allocation_summary(in.problem, solution);
  write_json(out_path, fairalloc::io::summary_to_json(in.problem, solution, summary));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-constrained intervention allocation under interference with "
               "per-unit counterfactual privilege bounds"};
  app.require_subcommand(1);

  std::string units_path, config_path, out_path, tau_flag, export_milp, taus_flag;
  std::string kind, params_text, model_out, config_out, solution_file, out_dir;
  std::uint64_t seed = 1;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic units file");
  synth->add_option("--kind", kind, "housing | housing_interference | additive_infeasible | nyc_like | random")
      ->required();
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--params", params_text, "generator parameters as inline JSON");
  synth->add_option("--out", out_path, "units CSV path")->required();
  synth->add_option("--model-out", model_out, "ground-truth model JSON path");
  synth->add_option("--config-out", config_out, "ready-to-run config JSON path");

  auto* fit = app.add_subcommand("fit", "Fit the max-interference model by group-wise OLS");
  fit->add_option("--units", units_path)->required();
  fit->add_option("--config", config_path);
  fit->add_option("--out", out_path, "fitted parameters JSON")->required();

  auto* solve = app.add_subcommand("solve", "Solve one allocation problem exactly");
  solve->add_option("--units", units_path)->required();
  solve->add_option("--config", config_path)->required();
  solve->add_option("--tau", tau_flag, "privilege bound; number or 'inf'");
  solve->add_option("--out", out_path, "solution JSON path");
  solve->add_option("--export-milp", export_milp, "write the program in text form");

  auto* oracle = app.add_subcommand("oracle", "Brute-force the same problem (small n)");
  oracle->add_option("--units", units_path)->required();
  oracle->add_option("--config", config_path)->required();
  oracle->add_option("--tau", tau_flag);
  oracle->add_option("--out", out_path);

  auto* path = app.add_subcommand("path", "Solve along a tau grid");
  path->add_option("--units", units_path)->required();
  path->add_option("--config", config_path)->required();
  path->add_option("--taus", taus_flag, "comma-separated taus (overrides config tau_list)");
  path->add_option("--out-dir", out_dir)->required();

  auto* summarize = app.add_subcommand("summarize", "Per-group allocation summary of a solution");
  summarize->add_option("--units", units_path)->required();
  summarize->add_option("--config", config_path)->required();
  summarize->add_option("--solution", solution_file)->required();
  summarize->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) return run_synth(kind, seed, params_text, out_path, model_out, config_out);
    if (fit->parsed()) return run_fit(units_path, config_path, out_path);
    if (solve->parsed())
      return run_solve(units_path, config_path, tau_flag, out_path, export_milp, false);
    if (oracle->parsed())
      return run_solve(units_path, config_path, tau_flag, out_path, export_milp, true);
    if (path->parsed()) return run_path(units_path, config_path, taus_flag, out_dir);
    if (summarize->parsed())
      return run_summarize(units_path, config_path, solution_file, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
