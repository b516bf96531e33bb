"""Solvers for log-based reconciliation: pick the largest set of actions
that respects dependency and precedence constraints, and schedule them."""

from .core import (
    ContractError,
    InputError,
    InternalError,
    Problem,
    Schedule,
    SolveStats,
    Violation,
    check_schedule,
    feasible_subset,
    load_problem,
    objective,
    save_problem,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ContractError",
    "InputError",
    "InternalError",
    "Problem",
    "Schedule",
    "SolveStats",
    "Violation",
    "check_schedule",
    "feasible_subset",
    "load_problem",
    "objective",
    "save_problem",
]
