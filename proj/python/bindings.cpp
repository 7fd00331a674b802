#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fairalloc/analysis.hpp"
#include "fairalloc/fit.hpp"
#include "fairalloc/io.hpp"
#include "fairalloc/milp.hpp"
#include "fairalloc/solver.hpp"

namespace py = pybind11;
using namespace fairalloc;

namespace {

io::json parse_json(const std::string& text) {
  return text.empty() ? io::json::object() : io::json::parse(text);
}

AllocationProblem problem_from_csv(const std::string& csv_text, const std::string& config_json,
                                   double tau) {
  std::istringstream csv(csv_text);
  const io::RunConfig config = io::RunConfig::from_json(parse_json(config_json));
  const io::LoadedUnits data =
      io::load_units_stream(csv, config.group_column, config.prec_feature_list);
  return io::build_problem(data, config, tau);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Budgeted intervention allocation under interference with counterfactual "
            "privilege bounds: exact MILP solver, brute-force oracle, tau paths.";

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("abs_gap_tol", &SolverConfig::abs_gap_tol)
      .def_readwrite("node_limit", &SolverConfig::node_limit)
      .def_readwrite("time_limit_seconds", &SolverConfig::time_limit_seconds);

  py::class_<Solution>(m, "Solution")
      .def_property_readonly("status",
                             [](const Solution& s) { return std::string(to_string(s.status)); })
      .def_readonly("z", &Solution::z)
      .def_readonly("objective", &Solution::objective)
      .def_readonly("bound", &Solution::bound)
      .def_readonly("per_unit_gaps", &Solution::per_unit_gaps)
      .def_readonly("nodes_explored", &Solution::nodes_explored);

  py::class_<PolicyReport>(m, "PolicyReport")
      .def_readonly("total", &PolicyReport::total)
      .def_readonly("unit_outcomes", &PolicyReport::unit_outcomes)
      .def_readonly("gaps", &PolicyReport::gaps)
      .def_readonly("budget_used", &PolicyReport::budget_used)
      .def_readonly("feasible", &PolicyReport::feasible);

  py::class_<AllocationProblem>(m, "AllocationProblem")
      .def_property_readonly("n", &AllocationProblem::size)
      .def_readonly("budget", &AllocationProblem::budget)
      .def_readonly("tau", &AllocationProblem::tau)
      .def_property_readonly("unit_ids",
                             [](const AllocationProblem& p) {
                               std::vector<std::string> ids;
                               for (const auto& u : p.units) ids.push_back(u.id);
                               return ids;
                             })
      .def_property_readonly("group_labels",
                             [](const AllocationProblem& p) { return p.groups.labels; });

  m.def("load_problem", &problem_from_csv, py::arg("units_csv"), py::arg("config_json"),
        py::arg("tau"),
        "Build an AllocationProblem from units-CSV text and a config JSON string.");

  m.def(
      "generate_synthetic",
      [](const std::string& kind, const std::string& params_json, std::uint64_t seed) {
        const auto inst = io::generate_synthetic(kind, parse_json(params_json), seed);
        std::ostringstream csv;
        io::write_units_csv(inst.data, csv);
        return py::make_tuple(csv.str(), io::synthetic_config(inst, seed).dump(2));
      },
      py::arg("kind"), py::arg("params_json") = std::string(), py::arg("seed") = 1,
      "Returns (units_csv, config_json) for a synthetic instance.");

  m.def(
      "solve",
      [](const AllocationProblem& problem, const SolverConfig& config) {
        return solve_problem(problem, config);
      },
      py::arg("problem"), py::arg("config") = SolverConfig{},
      "Encode and solve exactly by branch and bound.");

  m.def("oracle", &brute_force, py::arg("problem"),
        "Exhaustive reference solve for small instances.");

  m.def(
      "evaluate_policy",
      [](const AllocationProblem& problem, const std::vector<std::uint8_t>& z) {
        return evaluate_policy(problem, z);
      },
      py::arg("problem"), py::arg("z"));

  m.def(
      "solution_path",
      [](const AllocationProblem& problem, const std::vector<double>& taus,
         const SolverConfig& config) {
        const auto path = solution_path(problem, taus, config);
        py::list points;
        for (const auto& [tau, sol] : path.points) points.append(py::make_tuple(tau, sol));
        return points;
      },
      py::arg("problem"), py::arg("taus"), py::arg("config") = SolverConfig{});

  m.def(
      "fit_max_interference",
      [](const std::string& units_csv, const std::string& config_json) {
        std::istringstream csv(units_csv);
        const io::RunConfig config = io::RunConfig::from_json(parse_json(config_json));
        const io::LoadedUnits data =
            io::load_units_stream(csv, config.group_column, config.prec_feature_list);
        const FitResult result = fit_max_interference(io::build_fit_dataset(data, config));
        return io::fit_to_json(data.groups, result).dump(2);
      },
      py::arg("units_csv"), py::arg("config_json") = std::string(),
      "Group-wise OLS fit; returns the fitted model spec as a JSON string.");

  m.def(
      "export_milp",
      [](const AllocationProblem& problem) {
        const MilpProgram program = encode(problem);
        std::ostringstream out;
        export_text(program, out);
        return out.str();
      },
      py::arg("problem"), "Text form of the exact program, for external cross-checks.");

  m.attr("__version__") = "0.1.0";
}
