from __future__ import annotations

__all__ = [
    "AnalyticField",
    "ConvergenceError",
    "FieldLike",
    "Grid",
    "GridSpec",
    "KktReport",
    "ObstacleSpec",
    "ResidualField",
    "ScalarField",
    "SolveStats",
    "Stencil",
    "apply_operator",
    "as_field",
    "as_scalar_field",
    "build_grid",
    "default_tol",
    "discrete_energy",
    "homogeneous_y_field",
    "kkt_report",
    "residual_solve",
    "sample_on_grid",
    "solve",
    "very_thin_fundamental_field",
]

from .fields import (
    AnalyticField,
    FieldLike,
    ObstacleSpec,
    ResidualField,
    ScalarField,
    SolveStats,
    as_field,
    as_scalar_field,
    homogeneous_y_field,
    sample_on_grid,
    very_thin_fundamental_field,
)
from .grid import Grid, GridSpec, build_grid
from .kkt import KktReport, kkt_report
from .psor import ConvergenceError, default_tol, residual_solve, solve
from .stencil import Stencil, apply_operator, discrete_energy
