from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import structlog
from numpy.typing import NDArray

from .fields import ObstacleSpec, ScalarField
from .stencil import Stencil, constraint_mask

logger = structlog.get_logger(__name__)


@dataclass(slots=True)
class KktReport:
    """Complementarity residuals of a discrete field against an obstacle specification.

    Obstacle violation and ``nodal_residual`` are in value units. Flux-type quantities are flux densities:
    ``2 R`` per unit thin measure on the thin space, ``2 h R`` per unit line measure on the very thin space.
    """

    constraint_set: str
    max_obstacle_violation: float
    max_positive_flux: float
    max_complementarity: float
    interior_residual: float
    nodal_residual: float
    flux_points: NDArray[np.float64] = field(repr=False)
    flux_density: NDArray[np.float64] = field(repr=False)
    gap: NDArray[np.float64] = field(repr=False)

    def to_event(self) -> dict[str, Any]:
        return {
            "constraint_set": self.constraint_set,
            "max_obstacle_violation": self.max_obstacle_violation,
            "max_positive_flux": self.max_positive_flux,
            "max_complementarity": self.max_complementarity,
            "interior_residual": self.interior_residual,
            "nodal_residual": self.nodal_residual,
        }

    def to_payload(self) -> dict[str, Any]:
        payload = self.to_event()
        payload["flux_density"] = {
            "points": self.flux_points.tolist(),
            "values": self.flux_density.tolist(),
            "min": float(self.flux_density.min()) if self.flux_density.size else 0.0,
            "max": float(self.flux_density.max()) if self.flux_density.size else 0.0,
        }
        return payload

    def complementarity_defect(self) -> NDArray[np.float64]:
        """``min(u - phi, -flux)`` per constrained node; zero for an exact solution."""
        return np.asarray(np.minimum(self.gap, -self.flux_density))


def kkt_report(
    values: ScalarField,
    spec: ObstacleSpec,
    source: NDArray[np.float64] | None = None,
) -> KktReport:
    grid = values.grid
    stencil = Stencil.build(grid)
    u = values.values_array
    residual = stencil.residual(u, source)
    core = stencil.core

    constrained_core = constraint_mask(grid, spec)[core]
    points_core = grid.node_points().reshape(grid.shape + (grid.n + 1,))[core]
    constrained_points = points_core[constrained_core]
    phi = spec.obstacle_values(constrained_points)
    gap = u[core][constrained_core] - phi
    scale = 2.0 if spec.constraint_set == "thin" else 2.0 * grid.h
    flux = scale * residual[constrained_core]

    free = ~constrained_core
    scaled = np.abs(residual / stencil.diag)
    interior = float(scaled[free].max()) if free.any() else 0.0
    step = u[core] + residual / stencil.diag
    phi_core = np.full(step.shape, -np.inf)
    phi_core[constrained_core] = phi
    nodal = float(np.abs(np.where(constrained_core, np.maximum(step, phi_core), step) - u[core]).max())

    report = KktReport(
        constraint_set=spec.constraint_set,
        max_obstacle_violation=float(max(np.max(-gap, initial=0.0), 0.0)),
        max_positive_flux=float(max(np.max(flux, initial=0.0), 0.0)),
        max_complementarity=float(np.max(np.abs(gap) * np.abs(flux), initial=0.0)),
        interior_residual=interior,
        nodal_residual=nodal,
        flux_points=constrained_points[:, : grid.n],
        flux_density=flux,
        gap=gap,
    )
    logger.debug("kkt.report", **report.to_event())
    return report
