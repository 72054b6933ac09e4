"""Finite-volume solver for a degenerate p-Laplacian chemotaxis model."""
from ._backend import BACKEND
from .coefficients import CoefficientKind, CoefficientSet, A_of, a_of, f_of, g_of
from .errors import (
    ConfigurationError,
    GeometryError,
    ParameterError,
    SolverAbort,
    StabilityError,
    UsageError,
)
from .mesh import Mesh, build_regular_mesh, transmissibility
from .scheme import State, stable_dt, step
from .simulator import InitialSpec, RunSummary, SimConfig, preset, run

__version__ = "0.1.0"
