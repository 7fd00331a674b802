"""Budgeted intervention allocation under interference with counterfactual
privilege bounds."""

from ._core import (
    AllocationProblem,
    PolicyReport,
    Solution,
    SolverConfig,
    evaluate_policy,
    export_milp,
    fit_max_interference,
    generate_synthetic,
    load_problem,
    oracle,
    solution_path,
    solve,
)

__all__ = [
    "AllocationProblem",
    "PolicyReport",
    "Solution",
    "SolverConfig",
    "evaluate_policy",
    "export_milp",
    "fit_max_interference",
    "generate_synthetic",
    "load_problem",
    "oracle",
    "solution_path",
    "solve",
]

__version__ = "0.1.0"
