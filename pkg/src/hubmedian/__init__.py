"""Solver toolkit for the uncapacitated single allocation p-hub median
problem: island-model genetic algorithm, exact enumeration oracles,
benchmark instance I/O and a regression harness."""

from .engine import GaParams, Role, SolveReport, resolve_rng, solve
from .evaluation import (
    CostBreakdown,
    FitnessMode,
    InfeasibleSolutionError,
    avg_interhub_distance,
    fitness,
    objective,
)
from .io import generate_urand, load_instance, parse_instance, save_instance, serialize_instance
from .model import (
    Instance,
    Solution,
    StructureError,
    ValidationResult,
    initial_solution,
    middle_nodes,
    nearest_allocation,
    validate,
)
from .operators import correction, crossover, mutation, perturb
from .oracle import EnumerationLimitError, exact_optimum, restricted_optimum
from .rng import RngStream, derive_stream

__version__ = "0.1.0"

__all__ = [
    "CostBreakdown",
    "EnumerationLimitError",
    "FitnessMode",
    "GaParams",
    "InfeasibleSolutionError",
    "Instance",
    "RngStream",
    "Role",
    "Solution",
    "SolveReport",
    "StructureError",
    "ValidationResult",
    "avg_interhub_distance",
    "correction",
    "crossover",
    "derive_stream",
    "exact_optimum",
    "fitness",
    "generate_urand",
    "initial_solution",
    "load_instance",
    "middle_nodes",
    "mutation",
    "nearest_allocation",
    "objective",
    "parse_instance",
    "perturb",
    "resolve_rng",
    "restricted_optimum",
    "save_instance",
    "serialize_instance",
    "solve",
    "validate",
]
