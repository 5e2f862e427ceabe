from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import structlog
from numpy.typing import NDArray

from ..solver.fields import ObstacleSpec, ScalarField
from ..solver.grid import GridSpec, build_grid
from ..solver.psor import solve
from .fractional import LineObstacleSolution, line_obstacle_solve, line_source_potential
from .kernel import LineFunction

logger = structlog.get_logger(__name__)

CONTACT_TOL = 1e-6


@dataclass(slots=True)
class EquivalenceReport:
    """Box solve (w1) and line solve (w3) compared along the very thin line."""

    a: float
    res: int
    x: NDArray[np.float64]
    obstacle: NDArray[np.float64]
    w1: NDArray[np.float64]
    w3: NDArray[np.float64]
    contact_box: NDArray[np.bool_]
    contact_line: NDArray[np.bool_]
    contact_discrepancy: float
    line_discrepancy: float
    overlap: float
    sweeps: int

    def to_payload(self) -> dict[str, Any]:
        return {
            "a": self.a,
            "res": self.res,
            "contact_discrepancy": self.contact_discrepancy,
            "line_discrepancy": self.line_discrepancy,
            "overlap": self.overlap,
            "sweeps": self.sweeps,
            "contact_nodes": {"box": int(self.contact_box.sum()), "line": int(self.contact_line.sum())},
            "samples": {
                "x": self.x.tolist(),
                "obstacle": self.obstacle.tolist(),
                "w1": self.w1.tolist(),
                "w3": self.w3.tolist(),
            },
        }


def _line_points(x: NDArray[np.float64]) -> NDArray[np.float64]:
    pts = np.zeros((x.size, 3))
    pts[:, 0] = x
    return pts


def equivalence_chain(
    psi: LineFunction,
    a: float,
    *,
    res: int = 33,
    nodes: int = 201,
    tol: float | None = None,
    line_solution: LineObstacleSolution | None = None,
) -> EquivalenceReport:
    """Solve the codimension-two box problem and the fractional line problem for the same obstacle.

    The two solves are coupled through the box boundary: its Dirichlet data is the line-source potential of
    the line solution, so agreement inside the box is a consistency check of one global solution, not a
    comparison of two independent ones. ``contact_discrepancy`` is the worst ``|w1 - w3|`` over the union
    of both contact sets and ``line_discrepancy`` the worst over the whole line, both relative to ``max psi``.
    """
    if not -1.0 < a < 0.0:
        raise ValueError(f"the very thin problem needs a in (-1, 0), got a={a}")
    if not psi.decays():
        raise ValueError("obstacle must be compactly supported on its sample range")
    lo, hi = psi.support
    if lo <= -0.9 or hi >= 0.9:
        raise ValueError(f"obstacle support [{lo:g}, {hi:g}] must lie inside (-0.9, 0.9)")

    line = line_solution or line_obstacle_solve(psi, a, nodes=nodes)
    grid = build_grid(GridSpec(n=2, res=res, a=a))

    def boundary(points: NDArray[np.float64]) -> NDArray[np.float64]:
        return line_source_potential(line, points)

    def obstacle(points: NDArray[np.float64]) -> NDArray[np.float64]:
        return psi(points[:, 0])

    spec = ObstacleSpec("very_thin", boundary=boundary, obstacle=obstacle)
    field: ScalarField = solve(grid, spec, tol)

    x = grid.x
    w1 = field.values_array[:, grid.mid, 0]
    w3 = line_source_potential(line, _line_points(x))
    phi = psi(x)
    scale = max(float(np.abs(phi).max()), 1e-300)

    contact_box = (phi > 0.0) & (np.abs(w1 - phi) <= CONTACT_TOL * scale)
    interval = line.contact_interval()
    if interval is None:
        contact_line = np.zeros(x.size, dtype=bool)
    else:
        contact_line = (x >= interval[0]) & (x <= interval[1]) & (phi > 0.0)
    common = contact_box & contact_line
    union = contact_box | contact_line

    report = EquivalenceReport(
        a=a,
        res=res,
        x=x,
        obstacle=phi,
        w1=w1,
        w3=w3,
        contact_box=contact_box,
        contact_line=contact_line,
        contact_discrepancy=float(np.abs(w1 - w3)[union].max(initial=0.0) / scale),
        line_discrepancy=float(np.abs(w1 - w3).max() / scale),
        overlap=float(common.sum() / union.sum()) if union.any() else 1.0,
        sweeps=field.stats.sweeps if field.stats else 0,
    )
    logger.info("equivalence.chain", **{k: v for k, v in report.to_payload().items() if k != "samples"})
    return report
