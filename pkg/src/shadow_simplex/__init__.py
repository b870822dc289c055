"""Shadow vertex simplex solver for delta-distance LPs, with exact oracles."""

from .driver import SolveConfig, SolveOutcome, solve
from .harness import ExperimentConfig, generate_tu_instance, run_experiments
from .metrics import DeltaReport, delta_matrix, max_subdeterminant
from .model import (
    BasicSolution,
    LinearProgram,
    bound_polytope,
    make_lp,
    normalize,
    parse_lp,
    serialize_lp,
)
from .oracle import brute_force_optimum, enumerate_vertices, reference_simplex
from .randomness import RngConfig, bit_budget
from .walk import ShadowPath, shadow_walk

__all__ = [
    "BasicSolution",
    "DeltaReport",
    "ExperimentConfig",
    "LinearProgram",
    "RngConfig",
    "ShadowPath",
    "SolveConfig",
    "SolveOutcome",
    "bit_budget",
    "bound_polytope",
    "brute_force_optimum",
    "delta_matrix",
    "enumerate_vertices",
    "generate_tu_instance",
    "make_lp",
    "max_subdeterminant",
    "normalize",
    "parse_lp",
    "reference_simplex",
    "run_experiments",
    "serialize_lp",
    "shadow_walk",
    "solve",
]

__version__ = "0.1.0"
