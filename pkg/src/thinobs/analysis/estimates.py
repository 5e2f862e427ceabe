from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import structlog
from numpy.typing import NDArray

from ..poly.multipoly import MultiPoly
from ..poly.quadrature import ball_rule
from ..solver.fields import FieldLike, as_field, as_scalar_field

logger = structlog.get_logger(__name__)


@dataclass(slots=True)
class DirectionalStats:
    direction: list[float]
    radius: float
    step: float
    max_first: float
    min_second: float

    def to_event(self) -> dict[str, Any]:
        return {
            "direction": self.direction,
            "radius": self.radius,
            "step": self.step,
            "max_first": self.max_first,
            "min_second": self.min_second,
        }


def _shift(n: int, center: Sequence[float] | None) -> NDArray[np.float64]:
    out = np.zeros(n + 1)
    if center is not None:
        given = np.asarray(center, dtype=float)[:n]
        out[: given.size] = given
    return out


def linf_l2_ratio(
    source: FieldLike | MultiPoly,
    a: float,
    center: Sequence[float] | None = None,
    radius: float = 0.5,
    *,
    order: int = 16,
) -> float:
    """``sup_{B_{r/2}} |v| / ||v||_{L^2(B_r, |y|^a)}``; bounded for solutions of the thin problem."""
    fieldlike = as_field(source)
    rule = ball_rule(fieldlike.n, a, order, order)
    x0 = _shift(fieldlike.n, center)
    outer = fieldlike.values(x0 + radius * rule.points)
    l2 = float(np.sqrt(rule.scale(radius) * rule.integrate(outer**2)))
    inner = np.abs(fieldlike.values(x0 + 0.5 * radius * rule.points))
    grid_field = as_scalar_field(fieldlike)
    if grid_field is not None:
        nodes = grid_field.grid.node_points()
        inside = np.linalg.norm(nodes - x0, axis=1) <= 0.5 * radius
        inner = np.concatenate([inner, np.abs(grid_field.values_array.ravel()[inside])])
    if l2 == 0.0:
        return 0.0
    ratio = float(inner.max()) / l2
    logger.debug("estimates.linf_l2", ratio=ratio, radius=radius)
    return ratio


def directional_regularity(
    source: FieldLike | MultiPoly,
    direction: Sequence[float],
    center: Sequence[float] | None = None,
    radius: float = 0.25,
    *,
    step: float | None = None,
) -> DirectionalStats:
    """Max ``|d_e v|`` and min ``d_ee v`` by centred differences on points of ``B_radius``.

    ``e`` must be a thin-space direction. Grid fields are probed at their own nodes with step ``h``.
    """
    fieldlike = as_field(source)
    n = fieldlike.n
    e = np.zeros(n + 1)
    e[:n] = np.asarray(direction, dtype=float)[:n]
    norm = float(np.linalg.norm(e))
    if norm == 0.0:
        raise ValueError("direction must be non-zero")
    e /= norm
    x0 = _shift(n, center)
    grid_field = as_scalar_field(fieldlike)
    if grid_field is not None:
        h = grid_field.grid.h if step is None else step
        nodes = grid_field.grid.node_points()
        points = nodes[np.linalg.norm(nodes - x0, axis=1) <= radius]
    else:
        h = 1e-3 if step is None else step
        rule = ball_rule(n, 0.0, 6, 6)
        points = x0 + radius * rule.points
    if points.size == 0:
        raise ValueError(f"no sample points inside B_{radius:g}")
    plus = fieldlike.values(points + h * e)
    minus = fieldlike.values(points - h * e)
    middle = fieldlike.values(points)
    stats = DirectionalStats(
        direction=e[:n].tolist(),
        radius=radius,
        step=h,
        max_first=float(np.abs(plus - minus).max() / (2.0 * h)),
        min_second=float(((plus - 2.0 * middle + minus) / h**2).min()),
    )
    logger.debug("estimates.directional", **stats.to_event())
    return stats
