from __future__ import annotations

from fractions import Fraction

from .extension import ext_a
from .multipoly import Coeff, MultiPoly, multi_indices


def _thin_monomial(n: int, alpha: tuple[int, ...], coeff: Coeff = 1.0) -> MultiPoly:
    return MultiPoly.monomial(n, list(alpha) + [0], coeff)


def pkappa_basis(n: int, kappa: int, a: Coeff) -> list[MultiPoly]:
    """``{Ext_a(x^alpha) : |alpha| = kappa}``: a basis of even-in-y, a-harmonic, kappa-homogeneous polynomials."""
    return [ext_a(_thin_monomial(n, alpha), a) for alpha in multi_indices(n, kappa)]


def probe_set(n: int, kappa: int, a: Coeff) -> list[MultiPoly]:
    """Elements of P_kappa used as falsifiable probes: |x|^k, x_i^k and ((x_i +- x_j)/sqrt 2)^k."""
    if kappa % 2:
        raise ValueError(f"probe_set needs an even kappa, got {kappa}")
    radial = MultiPoly.zero(n)
    for i in range(n):
        radial = radial + MultiPoly.variable(n, i) ** 2
    probes = [ext_a(radial ** (kappa // 2), a)]
    probes.extend(ext_a(MultiPoly.variable(n, i) ** kappa, a) for i in range(n))
    scale = 2.0 ** (-kappa / 2)
    for i in range(n):
        for j in range(i + 1, n):
            for sign in (1.0, -1.0):
                line = MultiPoly.variable(n, i) + MultiPoly.variable(n, j, sign)
                probes.append(ext_a(line**kappa * scale, a))
    return probes


def quartic_singular_field(exact: bool = False) -> MultiPoly:
    """``Ext_0(x1^2 x2^2)``: order-4 singular point at the origin, order-2 points along both axes."""
    unit: Coeff = Fraction(1) if exact else 1.0
    base = _thin_monomial(2, (2, 2), unit)
    return ext_a(base, Fraction(0) if exact else 0.0)


def counterexample_pair(b: Coeff = Fraction(-1, 4)) -> tuple[MultiPoly, MultiPoly]:
    """The pair ``(p*, q)`` with ``q = Ext_0(b x1^4 - (11/24 + b) x2^4 + x1^2 x2^2)``.

    ``<q, p*>_0 = 0`` for every ``b``; the probe inequalities hold for ``b`` in ``[-1/3, -1/8]``.
    """
    exact = isinstance(b, Fraction)
    a: Coeff = Fraction(0) if exact else 0.0
    unit: Coeff = Fraction(1) if exact else 1.0
    p_star = quartic_singular_field(exact)
    eleven = Fraction(11, 24) if exact else 11.0 / 24.0
    thin = (
        _thin_monomial(2, (4, 0), b)
        + _thin_monomial(2, (0, 4), -(eleven + b))
        + _thin_monomial(2, (2, 2), unit)
    )
    return p_star, ext_a(thin, a)
