"""Projected SOR for the weighted thin and very-thin obstacle problems.

Red and black nodes decouple in the stencil, so every half-sweep is a vectorised Jacobi step on one
colour and the energy is non-increasing for ``0 < omega < 2``.
"""

from __future__ import annotations

import numpy as np
import structlog
from numpy.typing import NDArray

from ..poly.membership import is_in_P_kappa
from ..poly.multipoly import MultiPoly
from .fields import ObstacleSpec, ScalarField, SolveStats
from .grid import Grid
from .kkt import KktReport, kkt_report
from .stencil import Stencil, apply_operator, constraint_mask

logger = structlog.get_logger(__name__)

DEFAULT_OMEGA = 1.8
DEFAULT_MAX_SWEEPS = 20_000
ADMISSIBILITY_SLACK = 1e-12


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, report: KktReport, sweeps: int, energy_history: list[float]) -> None:
        super().__init__(message)
        self.report = report
        self.sweeps = sweeps
        self.energy_history = energy_history


def default_tol(n: int) -> float:
    return 1e-8 if n == 1 else 1e-6


def _check_admissible(grid: Grid, spec: ObstacleSpec) -> None:
    if spec.constraint_set == "very_thin" and grid.a >= 0:
        raise ValueError(
            f"very-thin constraint requires a < 0 (the line has zero a-harmonic capacity for a={grid.a})"
        )


def prepare_initial(
    grid: Grid, spec: ObstacleSpec
) -> tuple[NDArray[np.float64], NDArray[np.bool_], NDArray[np.float64]]:
    """Initial iterate with boundary data installed, the constrained core mask, and the obstacle array."""
    _check_admissible(grid, spec)
    points = grid.node_points()
    boundary = grid.boundary_mask()
    constrained = constraint_mask(grid, spec)
    u = np.zeros(grid.shape)
    flat_boundary = boundary.ravel()
    u.ravel()[flat_boundary] = spec.boundary_values(points[flat_boundary])
    phi = np.full(grid.shape, -np.inf)
    flat_constrained = constrained.ravel()
    phi.ravel()[flat_constrained] = spec.obstacle_values(points[flat_constrained])

    touching = constrained & boundary
    deficit = phi[touching] - u[touching]
    if deficit.size and float(deficit.max()) > ADMISSIBILITY_SLACK:
        raise ValueError(f"inadmissible boundary data: obstacle exceeds boundary values by {float(deficit.max()):.3e}")
    interior_constrained = constrained & ~boundary
    u[interior_constrained] = np.maximum(phi[interior_constrained], 0.0)
    return u, interior_constrained, phi


def solve(
    grid: Grid,
    spec: ObstacleSpec,
    tol: float | None = None,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    *,
    omega: float = DEFAULT_OMEGA,
    source: NDArray[np.float64] | None = None,
    initial: NDArray[np.float64] | None = None,
    log_every: int = 1000,
) -> ScalarField:
    """Minimise the discrete weighted energy over admissible nodal fields by red-black PSOR."""
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    tol = default_tol(grid.n) if tol is None else tol
    u, constrained, phi = prepare_initial(grid, spec)
    if initial is not None:
        interior = ~grid.boundary_mask()
        u[interior] = initial[interior]
        u[constrained] = np.maximum(u[constrained], phi[constrained])
    stencil = Stencil.build(grid)
    core = stencil.core
    phi_core = phi[core]
    constrained_core = constrained[core]
    index_sum = sum(np.indices(phi_core.shape))
    colours = [index_sum % 2 == 0, index_sum % 2 == 1]

    history = [stencil.energy(u, source)]
    max_update = np.inf
    nodal = np.inf
    sweeps = 0
    converged = False
    for sweeps in range(1, max_sweeps + 1):
        max_update = 0.0
        for colour in colours:
            residual = stencil.residual(u, source)
            view = u[core]
            trial = view + omega * residual / stencil.diag
            trial = np.where(constrained_core, np.maximum(trial, phi_core), trial)
            change = np.where(colour, trial - view, 0.0)
            max_update = max(max_update, float(np.abs(change).max()))
            u[core] = view + change
        history.append(stencil.energy(u, source))
        if log_every and sweeps % log_every == 0:
            logger.debug("psor.progress", sweeps=sweeps, max_update=max_update, energy=history[-1])
        if max_update < tol:
            nodal = nodal_residual(stencil, u, phi_core, constrained_core, source)
            if nodal < 10.0 * tol:
                converged = True
                break

    field = ScalarField(grid=grid, values_array=u, label="psor")
    field.stats = SolveStats(
        sweeps=sweeps,
        converged=converged,
        max_update=max_update,
        nodal_residual=nodal_residual(stencil, u, phi_core, constrained_core, source),
        energy_history=history,
    )
    if not converged:
        report = kkt_report(field, spec, source=source)
        logger.warning("psor.not_converged", sweeps=sweeps, max_update=max_update, **report.to_event())
        raise ConvergenceError(
            f"PSOR did not converge within {max_sweeps} sweeps (max update {max_update:.3e})",
            report=report,
            sweeps=sweeps,
            energy_history=history,
        )
    logger.info("psor.converged", **field.stats.to_event(), n=grid.n, res=grid.spec.res, a=grid.a)
    return field


def nodal_residual(
    stencil: Stencil,
    u: NDArray[np.float64],
    phi_core: NDArray[np.float64],
    constrained_core: NDArray[np.bool_],
    source: NDArray[np.float64] | None = None,
) -> float:
    """``max |P(u + R/diag) - u|`` over the core region (value units)."""
    view = u[stencil.core]
    step = view + stencil.residual(u, source) / stencil.diag
    projected = np.where(constrained_core, np.maximum(step, phi_core), step)
    return float(np.abs(projected - view).max())


def residual_solve(
    grid: Grid,
    spec: ObstacleSpec,
    base: MultiPoly,
    tol: float | None = None,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    *,
    omega: float = DEFAULT_OMEGA,
    samples: int = 4096,
    seed: int = 0,
) -> ScalarField:
    """Solve directly for ``v = u - base`` with obstacle ``phi - base`` and the shifted discrete source."""
    kappa = base.degree()
    verdict = is_in_P_kappa(base, kappa, grid.a, samples=samples, seed=seed)
    if not verdict.member:
        raise ValueError(f"base polynomial is not in P_kappa (kappa={kappa}): failed {', '.join(verdict.failures)}")
    base_values = base.values(grid.node_points()).reshape(grid.shape)
    shifted = ObstacleSpec(
        constraint_set=spec.constraint_set,
        boundary=lambda pts: spec.boundary_values(pts) - base.values(pts),
        obstacle=lambda pts: spec.obstacle_values(pts) - base.values(pts),
    )
    source = apply_operator(grid, base_values)
    field = solve(grid, shifted, tol, max_sweeps, omega=omega, source=source)
    field.label = "residual"
    logger.info(
        "psor.residual_solve", kappa=kappa, base=base.to_text(), sweeps=field.stats.sweeps if field.stats else 0
    )
    return field
