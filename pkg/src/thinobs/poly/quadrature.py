"""Weighted quadrature on spheres and balls centred on the thin space.

Integrands are assumed even in ``y``; the rules only place nodes on ``y >= 0`` and fold the
mirror half into the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy.special import roots_jacobi

from .multipoly import MultiPoly

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, slots=True)
class SphereRule:
    """Nodes on the upper unit sphere of R^{n+1} and weights for ``int f |y|^a dsigma``."""

    n: int
    a: float
    points: NDArray[np.float64]
    weights: NDArray[np.float64]

    def integrate(self, values: NDArray[np.float64]) -> float:
        return float(np.dot(self.weights, values))

    def nodes_at(self, center: NDArray[np.float64], radius: float) -> NDArray[np.float64]:
        shift = np.zeros(self.n + 1)
        shift[: len(center)] = center
        return shift + radius * self.points

    def scale(self, radius: float) -> float:
        """Jacobian of ``dsigma_r |y|^a`` relative to the unit sphere."""
        return float(radius ** (self.n + self.a))


@dataclass(frozen=True, slots=True)
class BallRule:
    n: int
    a: float
    points: NDArray[np.float64]
    weights: NDArray[np.float64]

    def integrate(self, values: NDArray[np.float64]) -> float:
        return float(np.dot(self.weights, values))

    def nodes_at(self, center: NDArray[np.float64], radius: float) -> NDArray[np.float64]:
        shift = np.zeros(self.n + 1)
        shift[: len(center)] = center
        return shift + radius * self.points

    def scale(self, radius: float) -> float:
        return float(radius ** (self.n + 1 + self.a))


@lru_cache(maxsize=64)
def _unit_sphere(dim: int, order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    alpha = (dim - 3) / 2
    t, wt = roots_jacobi(order, alpha, alpha)
    sub_pts, sub_w = _unit_sphere(dim - 1, order)
    radial = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    points = np.concatenate([np.hstack([r * sub_pts, np.full((len(sub_pts), 1), ti)]) for r, ti in zip(radial, t)])
    weights = np.concatenate([wi * sub_w for wi in wt])
    return points, weights


def unit_sphere_rule(dim: int, order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Product rule on the unit sphere of R^dim (unweighted surface measure)."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return _unit_sphere(dim, order)


@lru_cache(maxsize=64)
def sphere_rule(n: int, a: float, order: int = 16, order_xi: int | None = None) -> SphereRule:
    """Gauss-Jacobi in ``s = y^2`` absorbs ``|y|^a``; a product rule covers the x-sphere."""
    if not -1 < a < 1:
        raise ValueError(f"Unsupported weight exponent a={a}; expected a in (-1, 1)")
    alpha = (n - 2) / 2
    beta = (a - 1) / 2
    u, wu = roots_jacobi(order, alpha, beta)
    s = (1.0 + u) / 2.0
    factor = 2.0 ** (-(alpha + beta + 1))
    xi, wxi = unit_sphere_rule(n, order_xi or order)
    blocks = []
    wblocks = []
    for si, wi in zip(s, wu):
        rho = np.sqrt(max(1.0 - si, 0.0))
        blocks.append(np.hstack([rho * xi, np.full((len(xi), 1), np.sqrt(si))]))
        wblocks.append(factor * wi * wxi)
    return SphereRule(n=n, a=a, points=np.concatenate(blocks), weights=np.concatenate(wblocks))


@lru_cache(maxsize=64)
def ball_rule(n: int, a: float, order_r: int = 16, order: int = 16) -> BallRule:
    """Radial Gauss-Jacobi for ``rho^{n+a}`` times :func:`sphere_rule`."""
    sphere = sphere_rule(n, a, order)
    u, wu = roots_jacobi(order_r, 0.0, n + a)
    rho = (1.0 + u) / 2.0
    factor = 2.0 ** (-(n + a + 1))
    points = np.concatenate([r * sphere.points for r in rho])
    weights = np.concatenate([factor * w * sphere.weights for w in wu])
    return BallRule(n=n, a=a, points=points, weights=weights)


@lru_cache(maxsize=32)
def half_circle_rule(a: float, order: int = 32) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Angles in (0, pi) and weights with ``sum w g(theta) = int_0^pi g(theta) |sin theta|^a dtheta``."""
    u, wu = roots_jacobi(order, a, a)
    theta = np.pi * (1.0 + u) / 2.0
    correction = (np.cos(np.pi * u / 2.0) / ((1.0 - u) * (1.0 + u))) ** a
    return theta, (np.pi / 2.0) * wu * correction


def sphere_inner(p: MultiPoly, q: MultiPoly, a: float) -> float:
    """``<p, q>_a = int_{dB_1} p q |y|^a`` with a rule exact for the product degree."""
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: n={p.n} vs n={q.n}")
    product = (p.as_float() * q.as_float()).even_part_in_y()
    if product.is_zero():
        return 0.0
    degree = product.degree()
    rule = sphere_rule(p.n, float(a), degree // 4 + 2, degree // 2 + 2)
    return rule.integrate(product.values(rule.points))


def sphere_norm_sq(p: MultiPoly, a: float) -> float:
    return sphere_inner(p, p, a)
