from __future__ import annotations

from typing import Sequence

import numpy as np
import structlog
from numpy.typing import NDArray

from ..poly.multipoly import MultiPoly
from ..poly.quadrature import half_circle_rule
from ..solver.fields import FieldLike, as_field, as_scalar_field

logger = structlog.get_logger(__name__)

ANALYTIC_EPS = 1e-3


def _thin_points(n: int, points: NDArray[np.float64] | Sequence[float]) -> NDArray[np.float64]:
    """Accept ``x'`` (``n - 1`` columns, embedded with ``x_n = 0``) or full thin points (``n`` columns)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if n == 1 and pts.size == 0:
        return np.zeros((1, 1))
    if pts.shape[1] == n - 1:
        pts = np.hstack([pts, np.zeros((pts.shape[0], 1))])
    if pts.shape[1] != n:
        raise ValueError(f"expected points with {n - 1} or {n} coordinates, got {pts.shape[1]}")
    return pts


def _unit_normal(n: int, normal: Sequence[float] | None) -> NDArray[np.float64]:
    nu = np.zeros(n)
    if normal is None:
        nu[n - 1] = 1.0
    else:
        nu[:] = np.asarray(normal, dtype=float)[:n]
    length = float(np.linalg.norm(nu))
    if length == 0.0:
        raise ValueError("normal must be non-zero")
    return nu / length


def circle_flux(
    source: FieldLike | MultiPoly,
    points: NDArray[np.float64] | Sequence[float],
    eps: float,
    a: float,
    *,
    normal: Sequence[float] | None = None,
    order: int = 32,
) -> NDArray[np.float64]:
    """``int_{dD_eps} u_nu |y|^a`` over the circle of radius ``eps`` in the (normal, y)-plane.

    Only the ``y >= 0`` half is sampled; evenness in ``y`` doubles it.
    """
    if eps <= 0.0:
        raise ValueError(f"circle radius must be positive, got {eps}")
    fieldlike = as_field(source)
    n = fieldlike.n
    centers = _thin_points(n, points)
    nu = _unit_normal(n, normal)
    theta, weights = half_circle_rule(float(a), order)
    direction = np.zeros((theta.size, n + 1))
    direction[:, :n] = np.cos(theta)[:, None] * nu[None, :]
    direction[:, n] = np.sin(theta)

    grid_field = as_scalar_field(fieldlike)
    out = np.empty(centers.shape[0])
    for i, c in enumerate(centers):
        base = np.append(c, 0.0)
        if grid_field is not None:
            width = grid_field.grid.spec.half_width
            if float(np.abs(c).max(initial=0.0)) + eps > width:
                raise ValueError(f"circle of radius {eps:g} around {c.tolist()} leaves the grid")
        nodes = base[None, :] + eps * direction
        radial = np.sum(fieldlike.gradients(nodes) * direction, axis=1)
        out[i] = 2.0 * eps ** (1.0 + a) * float(np.dot(weights, radial))
    return out


def f_a_flux(
    source: FieldLike | MultiPoly,
    points: NDArray[np.float64] | Sequence[float],
    a: float,
    *,
    eps: float | None = None,
    normal: Sequence[float] | None = None,
    order: int = 32,
) -> NDArray[np.float64]:
    """Flux density of ``u`` on the very thin space: small-circle fluxes at ``eps`` and ``2 eps`` with a linear
    Richardson step. ``eps`` defaults to ``2h`` on grid fields."""
    fieldlike = as_field(source)
    grid_field = as_scalar_field(fieldlike)
    if eps is None:
        eps = 2.0 * grid_field.grid.h if grid_field is not None else ANALYTIC_EPS
    near = circle_flux(fieldlike, points, eps, a, normal=normal, order=order)
    far = circle_flux(fieldlike, points, 2.0 * eps, a, normal=normal, order=order)
    result = 2.0 * near - far
    logger.debug("flux.f_a", points=int(result.size), eps=eps, min=float(result.min()), max=float(result.max()))
    return np.asarray(result)
