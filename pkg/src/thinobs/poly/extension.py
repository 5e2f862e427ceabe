from __future__ import annotations

import math
from fractions import Fraction

import structlog

from .multipoly import Coeff, MultiPoly

logger = structlog.get_logger(__name__)


def check_weight(a: Coeff) -> None:
    if not -1 < float(a) < 1:
        raise ValueError(f"Unsupported weight exponent a={a}; expected a in (-1, 1)")


def ext_a(pbar: MultiPoly, a: Coeff) -> MultiPoly:
    """Even-in-y a-harmonic extension of a thin-space polynomial.

    Ext_a(p) = p + sum_j (-1)^j c_j y^{2j} / (2j)! * Delta_x^j p with c_j = prod_{i<=j} (2i-1)/(2i-1+a).
    Pass a ``Fraction`` for ``a`` (and exact coefficients) to stay in rational arithmetic.
    """
    check_weight(a)
    if any(key[-1] for key in pbar.coeffs):
        raise ValueError("ext_a expects a polynomial independent of y")
    n = pbar.n
    exact = pbar.is_exact or isinstance(a, Fraction)
    unit: Coeff = Fraction(1) if exact else 1.0
    result = pbar.as_exact() if exact else pbar
    lap = result
    c_j: Coeff = unit
    j = 0
    while True:
        j += 1
        lap = lap.laplacian_x()
        if lap.is_zero():
            break
        c_j = c_j * (2 * j - 1) / (2 * j - 1 + a)
        factor = c_j * (-1) ** j / math.factorial(2 * j)
        y_power = MultiPoly.monomial(n, [0] * n + [2 * j], unit)
        result = result + (y_power * lap) * factor
    return result


def la_residual(p: MultiPoly, a: Coeff) -> MultiPoly:
    """Polynomial ``Delta p + a * (d_y p) / y``; zero exactly when ``p`` is a-harmonic."""
    check_weight(a)
    if not p.even_in_y:
        raise ValueError("la_residual expects a polynomial even in y")
    dy = p.derivative(p.n)
    drift = dy.divide_by_y() * a if not dy.is_zero() else MultiPoly.zero(p.n)
    return p.laplacian() + drift


def is_a_harmonic(p: MultiPoly, a: Coeff, tol: float = 1e-12) -> bool:
    scale = max(p.max_abs_coeff(), 1.0)
    return la_residual(p, a).is_zero(tol * scale)
