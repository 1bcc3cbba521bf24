"""Exact front tracking for scalar conservation laws whose convex,
piecewise-linear flux jumps in space and may be flat near its minimum."""

from .diagnostics import (
    EntropyReport,
    Verdict,
    adapted_entropy_report,
    bv_bound,
    contraction_check,
    interface_entropy,
    time_lipschitz_check,
    total_variation,
    transformed_tv,
)
from .errors import ConfigError, WavefrontError
from .flux_core import (
    DEFAULT_TOL,
    EXACT_TOL,
    PLConvexFlux,
    SpatialFluxField,
    Tolerances,
    build_field,
    build_pl_flux,
    complete_breakpoints,
    complete_field,
)
from .fvref import GridSolution, godunov_solve, interface_godunov_flux
from .piecewise import PiecewiseConstantFunction
from .riemann import Front, WaveFan, classical_riemann, interface_riemann
from .tracker import Trajectory, init_state, run, sample, solve

__all__ = [
    "EntropyReport", "Verdict", "adapted_entropy_report", "bv_bound", "contraction_check",
    "interface_entropy", "time_lipschitz_check", "total_variation", "transformed_tv",
    "ConfigError", "WavefrontError", "DEFAULT_TOL", "EXACT_TOL", "PLConvexFlux", "SpatialFluxField", "Tolerances",
    "build_field", "build_pl_flux", "complete_breakpoints", "complete_field", "GridSolution",
    "godunov_solve", "interface_godunov_flux", "PiecewiseConstantFunction", "Front", "WaveFan",
    "classical_riemann", "interface_riemann", "Trajectory", "init_state", "run", "sample",
    "solve",
]
