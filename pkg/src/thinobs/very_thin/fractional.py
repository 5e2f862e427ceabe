"""One-dimensional fractional tools used as independent oracles for the very thin problem (n = 2).

``sigma = -a/2``. The fundamental solution of ``(-Delta)^sigma`` on the line is proportional to ``|t|^{-1-a}``,
which is also the restriction of the weighted fundamental solution ``|X|^{-(1+a)}`` of ``R^3`` to the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy.integrate import quad
from scipy.special import gamma

from .kernel import LineFunction

logger = structlog.get_logger(__name__)


def fractional_constant(sigma: float) -> float:
    """``c_{1,sigma}`` of the singular-integral definition of ``(-Delta)^sigma`` on the line."""
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    return float(sigma * 4.0**sigma * gamma(0.5 + sigma) / (math.sqrt(math.pi) * gamma(1.0 - sigma)))


def fractional_laplacian_direct(
    line: LineFunction,
    points: NDArray[np.float64] | Sequence[float],
    sigma: float,
    *,
    cutoff: float | None = None,
    taylor_radius: float | None = None,
) -> NDArray[np.float64]:
    """``(-Delta)^sigma v`` by the symmetric singular integral.

    ``c int_0^R (2v(x) - v(x-w) - v(x+w)) w^{-1-2 sigma} dw + 2 c v(x) R^{-2 sigma} / (2 sigma)`` with
    ``R = 20 * support length``; the inner ``w < delta`` piece uses the Taylor term ``-v''(x) w^2``.
    """
    lo, hi = line.support
    length = hi - lo
    big_r = 20.0 * length if cutoff is None else cutoff
    delta = 2.0 * line.spacing if taylor_radius is None else taylor_radius
    power = -1.0 - 2.0 * sigma
    const = fractional_constant(sigma)
    spline = line.spline()
    xs = np.atleast_1d(np.asarray(points, dtype=float))
    out = np.empty(xs.size)
    for i, x in enumerate(xs):
        vx = float(line(np.array([x]))[0])
        second = float(spline(x, 2)) if lo <= x <= hi else 0.0

        def integrand(w: float, x: float = x, vx: float = vx) -> float:
            pair = line(np.array([x - w, x + w]))
            return float((2.0 * vx - pair[0] - pair[1]) * w**power)

        # kinks of v(x +- w) sit where x +- w crosses the support ends
        breaks = sorted({abs(x - lo), abs(x - hi)} | {delta})
        breaks = [b for b in breaks if delta <= b < big_r]
        middle = 0.0
        edges = [delta, *[b for b in breaks if b > delta], big_r]
        for left, right in zip(edges[:-1], edges[1:]):
            value, _ = quad(integrand, left, right, limit=400, epsabs=1e-13, epsrel=1e-11)
            middle += value
        inner = -second * delta ** (3.0 + power) / (3.0 + power)
        tail = 2.0 * vx * big_r ** (-2.0 * sigma) / (2.0 * sigma)
        out[i] = const * (inner + middle + tail)
    return out


def _riesz_antiderivative(t: NDArray[np.float64], p: float) -> NDArray[np.float64]:
    return np.asarray(np.abs(t) ** (p + 2.0) / ((p + 1.0) * (p + 2.0)))


def riesz_matrix(x: NDArray[np.float64], a: float) -> NDArray[np.float64]:
    """Galerkin matrix of ``|t|^{-1-a}`` against hat functions: ``G_ij = int hat_j(t) |x_i - t|^p dt``."""
    p = -1.0 - a
    h = float(x[1] - x[0])
    d = x[:, None] - x[None, :]
    second = _riesz_antiderivative(d + h, p) - 2.0 * _riesz_antiderivative(d, p) + _riesz_antiderivative(d - h, p)
    return np.asarray(second / h)


@dataclass(slots=True)
class LineObstacleSolution:
    x: NDArray[np.float64]
    obstacle: NDArray[np.float64]
    density: NDArray[np.float64]
    w: NDArray[np.float64]
    a: float
    sweeps: int
    converged: bool
    contact: NDArray[np.bool_] = field(init=False)

    def __post_init__(self) -> None:
        scale = max(float(np.abs(self.obstacle).max()), 1.0)
        self.contact = np.asarray((self.density > 0.0) | (np.abs(self.w - self.obstacle) <= 1e-8 * scale))
        self.contact &= self.obstacle > 0.0

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    def to_event(self) -> dict[str, Any]:
        return {
            "nodes": int(self.x.size),
            "sweeps": self.sweeps,
            "converged": self.converged,
            "contact_nodes": int(self.contact.sum()),
            "total_mass": float(self.density.sum() * self.spacing),
            "min_gap": float((self.w - self.obstacle).min()),
        }

    def contact_interval(self) -> tuple[float, float] | None:
        if not self.contact.any():
            return None
        idx = np.flatnonzero(self.contact)
        return float(self.x[idx[0]]), float(self.x[idx[-1]])


def line_obstacle_solve(
    psi: LineFunction,
    a: float,
    *,
    nodes: int = 201,
    tol: float = 1e-10,
    max_sweeps: int = 20_000,
) -> LineObstacleSolution:
    """``w = G mu`` with ``mu >= 0``, ``w >= psi`` and ``mu (w - psi) = 0``, by projected Gauss-Seidel.

    Only nodes with ``psi > 0`` can carry mass; zero elsewhere is admissible because ``w >= 0``.
    """
    if not -1.0 < a < 0.0:
        raise ValueError(f"the line problem needs a in (-1, 0), got a={a}")
    if not psi.decays():
        raise ValueError("obstacle must be compactly supported on its sample range")
    lo, hi = psi.support
    x = np.linspace(lo, hi, nodes)
    obstacle = psi(x)
    density = np.zeros(nodes)
    if (obstacle <= 0.0).all():
        logger.info("fractional.line_solve.trivial", nodes=nodes)
        return LineObstacleSolution(
            x=x, obstacle=obstacle, density=density, w=np.zeros(nodes), a=a, sweeps=0, converged=True
        )
    matrix = riesz_matrix(x, a)
    diag = np.diag(matrix).copy()
    w = np.zeros(nodes)
    active = np.flatnonzero(obstacle > 0.0)
    sweeps = 0
    converged = False
    for sweeps in range(1, max_sweeps + 1):
        biggest = 0.0
        for i in active:
            updated = max(0.0, density[i] + (obstacle[i] - w[i]) / diag[i])
            change = updated - density[i]
            if change != 0.0:
                w += change * matrix[:, i]
                density[i] = updated
                biggest = max(biggest, abs(change) * diag[i])
        if biggest < tol:
            converged = True
            break
    solution = LineObstacleSolution(
        x=x, obstacle=obstacle, density=density, w=w, a=a, sweeps=sweeps, converged=converged
    )
    if not converged:
        logger.warning("fractional.line_solve.not_converged", **solution.to_event())
    logger.info("fractional.line_solve", **solution.to_event())
    return solution


def line_source_potential(
    solution: LineObstacleSolution, points: NDArray[np.float64], *, near: float | None = None
) -> NDArray[np.float64]:
    """Weighted-harmonic extension ``int |X - (t, 0, 0)|^{-(1+a)} dmu(t)`` of the line solution to ``R^3``.

    Points closer than ``near`` (default ``2h``) to the line fall back to ``G mu`` interpolated along it.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 3:
        raise ValueError("line_source_potential expects (x1, x2, y) points")
    p = -1.0 - solution.a
    h = solution.spacing
    threshold = 2.0 * h if near is None else near
    mass = solution.density * h
    rho = np.hypot(pts[:, 1], pts[:, 2])
    out = np.empty(pts.shape[0])
    far = rho >= threshold
    if far.any():
        diff = pts[far, 0][:, None] - solution.x[None, :]
        dist = np.sqrt(diff**2 + rho[far, None] ** 2)
        out[far] = (dist**p) @ mass
    if (~far).any():
        out[~far] = np.interp(pts[~far, 0], solution.x, solution.w, left=0.0, right=0.0)
        outside = (pts[~far, 0] < solution.x[0]) | (pts[~far, 0] > solution.x[-1])
        if outside.any():
            idx = np.flatnonzero(~far)[outside]
            diff = pts[idx, 0][:, None] - solution.x[None, :]
            out[idx] = (np.abs(diff) ** p) @ mass
    return out

