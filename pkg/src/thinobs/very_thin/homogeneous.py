"""Homogeneous solutions ``u = rho^lam g(theta)`` of the planar problem (n = 1, plane ``(x, y)``).

``L_a u = rho^{lam-2} (g'' + a cot(theta) g' + lam (lam + a) g)`` with ``theta`` measured from the positive
x-axis; only the upper half ``theta in [0, pi]`` is sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy.interpolate import CubicSpline

from ..poly.extension import check_weight, la_residual
from ..poly.multipoly import MultiPoly, sum_polys
from ..poly.quadrature import half_circle_rule

logger = structlog.get_logger(__name__)

AngularProfile = Callable[[NDArray[np.float64]], NDArray[np.float64]]
THETA_MARGIN = 0.05
SNAP_TOL = 1e-6


@dataclass(slots=True)
class HomogeneousVerdict:
    lam: float
    a: float
    valid: bool
    admissible_homogeneity: bool
    subcase: str
    ode_residual: float
    origin_flux: float
    polynomial: MultiPoly | None = None
    polynomial_residual: float | None = None
    reasons: list[str] = field(default_factory=list)

    def to_payload(self) -> dict[str, Any]:
        return {
            "lam": self.lam,
            "a": self.a,
            "valid": self.valid,
            "admissible_homogeneity": self.admissible_homogeneity,
            "subcase": self.subcase,
            "ode_residual": self.ode_residual,
            "origin_flux": self.origin_flux,
            "polynomial": None if self.polynomial is None else self.polynomial.to_text(),
            "polynomial_residual": self.polynomial_residual,
            "reasons": list(self.reasons),
        }


def profile_from_poly(p: MultiPoly) -> AngularProfile:
    """Restriction of a planar polynomial to the unit half-circle."""
    if p.n != 1:
        raise ValueError(f"angular profiles live in the plane (n = 1), got n={p.n}")

    def g(theta: NDArray[np.float64]) -> NDArray[np.float64]:
        theta = np.asarray(theta, dtype=float)
        return p.values(np.stack([np.cos(theta), np.sin(theta)], axis=1))

    return g


def _planar_fit(theta: NDArray[np.float64], values: NDArray[np.float64], degree: int) -> tuple[MultiPoly, float]:
    """Least squares over even-in-y monomials ``x^{d-2j} y^{2j}`` on the half-circle."""
    exponents = [(degree - 2 * j, 2 * j) for j in range(degree // 2 + 1)]
    c, s = np.cos(theta), np.sin(theta)
    design = np.stack([c**i * s**k for i, k in exponents], axis=1)
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    misfit = float(np.abs(design @ coef - values).max() / max(float(np.abs(values).max()), 1e-300))
    poly = sum_polys(1, [MultiPoly.monomial(1, list(e), float(ci)) for e, ci in zip(exponents, coef)])
    return poly, misfit


def verify_homogeneous_2d(
    g: AngularProfile | tuple[NDArray[np.float64], NDArray[np.float64]],
    lam: float,
    a: float,
    *,
    samples: int = 801,
    tol: float = 1e-3,
) -> HomogeneousVerdict:
    """Check that ``rho^lam g(theta)`` solves the planar very thin problem with zero obstacle.

    Admissible homogeneities are ``-a`` and the positive integers; integer ones must also be polynomial.
    """
    check_weight(a)
    if callable(g):
        theta = np.linspace(THETA_MARGIN, np.pi - THETA_MARGIN, samples)
        values = np.asarray(g(theta), dtype=float)
        profile: AngularProfile = g
    else:
        theta, values = (np.asarray(arr, dtype=float) for arr in g)
        spline_profile = CubicSpline(theta, values)
        keep = (theta >= THETA_MARGIN) & (theta <= np.pi - THETA_MARGIN)
        theta, values = theta[keep], values[keep]
        profile = spline_profile
    spline = CubicSpline(theta, values)
    d1 = spline(theta, 1)
    d2 = spline(theta, 2)
    residual = d2 + a * d1 / np.tan(theta) + lam * (lam + a) * values
    scale = max(float(np.abs(values).max()), 1e-300) * max(1.0, lam * lam)
    ode_residual = float(np.abs(residual).max() / scale)

    reasons: list[str] = []
    nearest = round(lam)
    integer = nearest >= 1 and abs(lam - nearest) <= SNAP_TOL
    fractional = a < 0 and abs(lam + a) <= SNAP_TOL
    admissible = integer or fractional
    if lam <= 0 and not fractional:
        reasons.append("non_positive_homogeneity")
    if not admissible:
        reasons.append("homogeneity_not_admissible")
    if ode_residual > tol:
        reasons.append("ode_residual")

    # circle flux is 2 lam eps^{lam + a} int_0^pi g |sin|^a, nonzero as eps -> 0 only at lam = -a
    nodes, weights = half_circle_rule(float(a), 64)
    circle_integral = float(np.dot(weights, np.asarray(profile(nodes), dtype=float)))
    origin_flux = 2.0 * lam * circle_integral if fractional else 0.0
    if origin_flux > tol * max(1.0, abs(circle_integral)):
        reasons.append("origin_measure_sign")

    polynomial: MultiPoly | None = None
    poly_residual: float | None = None
    subcase = "none"
    if integer:
        polynomial, poly_residual = _planar_fit(theta, values, int(nearest))
        harmonic = la_residual(polynomial, a).is_zero(tol * max(polynomial.max_abs_coeff(), 1.0))
        if poly_residual > tol or not harmonic:
            reasons.append("polynomial_fit")
        subcase = "polynomial"
    elif fractional:
        subcase = "fractional"

    verdict = HomogeneousVerdict(
        lam=float(lam),
        a=float(a),
        valid=not reasons,
        admissible_homogeneity=admissible,
        subcase=subcase,
        ode_residual=ode_residual,
        origin_flux=origin_flux,
        polynomial=polynomial,
        polynomial_residual=poly_residual,
        reasons=reasons,
    )
    logger.info("homogeneous.verdict", **{k: v for k, v in verdict.to_payload().items() if k != "polynomial"})
    return verdict
