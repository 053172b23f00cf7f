"""2-D Keller-Segel-logistic simulation with a-priori bound verification."""

from .bounds import (
    BoundConstants,
    InitialNorms,
    ModelParams,
    MuNonpositiveError,
    compute_constants,
    compute_paper_bounds,
    equilibrium,
    estimate_gn_constant,
)
from .field import Domain2D, Field2D
from .monitor import CheckEntry, TrajectoryRecord
from .solver import RunOutcome, SolverConfig, State, make_initial, run, stable_dt, step

__version__ = "0.1.0"

__all__ = [
    "BoundConstants",
    "CheckEntry",
    "Domain2D",
    "Field2D",
    "InitialNorms",
    "ModelParams",
    "MuNonpositiveError",
    "RunOutcome",
    "SolverConfig",
    "State",
    "TrajectoryRecord",
    "compute_constants",
    "compute_paper_bounds",
    "equilibrium",
    "estimate_gn_constant",
    "make_initial",
    "run",
    "stable_dt",
    "step",
    "__version__",
]
