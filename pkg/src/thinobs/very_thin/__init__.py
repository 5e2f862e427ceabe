from __future__ import annotations

__all__ = [
    "Barrier",
    "BarrierReport",
    "DominanceReport",
    "EquivalenceReport",
    "ExtensionField",
    "FluxCheck",
    "HomogeneousVerdict",
    "KernelCheck",
    "KernelSpec",
    "LineFunction",
    "LineObstacleSolution",
    "SymbolCheck",
    "barrier",
    "barrier_dominance",
    "barrier_profile",
    "circle_flux",
    "cutoff",
    "equivalence_chain",
    "extend",
    "extend_on_grid",
    "f_a_flux",
    "flux_check",
    "fractional_constant",
    "fractional_laplacian_direct",
    "kernel_check",
    "kernel_eval",
    "kernel_mass",
    "line_obstacle_solve",
    "line_source_potential",
    "profile_from_poly",
    "riesz_matrix",
    "symbol_check",
    "verify_homogeneous_2d",
]

from .barrier import Barrier, BarrierReport, DominanceReport, barrier, barrier_dominance, barrier_profile, cutoff
from .checks import FluxCheck, KernelCheck, SymbolCheck, flux_check, kernel_check, kernel_mass, symbol_check
from .equivalence import EquivalenceReport, equivalence_chain
from .flux import circle_flux, f_a_flux
from .fractional import (
    LineObstacleSolution,
    fractional_constant,
    fractional_laplacian_direct,
    line_obstacle_solve,
    line_source_potential,
    riesz_matrix,
)
from .homogeneous import HomogeneousVerdict, profile_from_poly, verify_homogeneous_2d
from .kernel import ExtensionField, KernelSpec, LineFunction, extend, extend_on_grid, kernel_eval
