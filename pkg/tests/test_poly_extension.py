from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.thinobs.poly import (
    MultiPoly,
    ext_a,
    is_in_P_kappa,
    la_residual,
    multi_indices,
    pkappa_basis,
    quartic_singular_field,
    spine,
    thin_zero_mask,
)


def test_ext_a_of_square_at_zero_weight() -> None:
    assert ext_a(MultiPoly.from_text("x1^2", 1), 0.0) == MultiPoly.from_text("x1^2 - y^2", 1)


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5])
def test_ext_a_of_constant_is_constant(a: float) -> None:
    assert ext_a(MultiPoly.constant(2, 1.0), a) == MultiPoly.constant(2, 1.0)


def test_ext_a_quartic_matches_closed_form() -> None:
    expected = MultiPoly.from_text("x1^2 x2^2 - x1^2 y^2 - x2^2 y^2 + 1/3 * y^4", 2, exact=True)
    assert quartic_singular_field(exact=True) == expected


def test_ext_a_weighted_coefficients_are_exact_rationals() -> None:
    a = Fraction(-1, 2)
    cubic = ext_a(MultiPoly.from_text("x1^3", 1, exact=True), a)
    assert cubic == MultiPoly.from_text("x1^3 - 6 * x1 y^2", 1, exact=True)
    square = ext_a(MultiPoly.from_text("x1^2", 1, exact=True), a)
    assert square.coefficient([0, 2]) == Fraction(-2)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([Fraction(-1, 2), Fraction(-1, 4), Fraction(0), Fraction(1, 3), Fraction(3, 4)]),
    st.integers(0, 6),
    st.integers(0, 3),
)
def test_ext_a_is_a_harmonic_and_even(a: Fraction, degree: int, pick: int) -> None:
    indices = multi_indices(2, degree)
    alpha = indices[pick % len(indices)]
    extended = ext_a(MultiPoly.monomial(2, list(alpha), Fraction(1)), a)
    assert extended.even_in_y
    assert la_residual(extended, a).is_zero()
    assert extended.restrict_thin() == MultiPoly.monomial(2, list(alpha), Fraction(1))


def test_ext_a_restriction_identity_on_a_harmonic_polynomials() -> None:
    a = Fraction(-1, 2)
    for p in pkappa_basis(2, 3, a):
        assert ext_a(p.restrict_thin(), a) == p


def test_ext_a_rejects_y_dependence_and_bad_weight() -> None:
    with pytest.raises(ValueError):
        ext_a(MultiPoly.from_text("x1 y", 1), 0.0)
    with pytest.raises(ValueError, match="weight exponent"):
        ext_a(MultiPoly.from_text("x1^2", 1), 1.0)


def test_la_residual_examples() -> None:
    assert la_residual(MultiPoly.from_text("x1^2", 1), 0.0) == MultiPoly.constant(1, 2.0)
    residual = la_residual(MultiPoly.from_text("y^2", 1), -0.5)
    assert residual == MultiPoly.constant(1, 1.0)
    with pytest.raises(ValueError):
        la_residual(MultiPoly.from_text("x1 y", 1), 0.0)


@pytest.mark.parametrize(
    ("text", "dim"),
    [("x2^2", 1), ("x1^2 x2^2", 0), ("x1^2 + 2 * x1 x2 + x2^2", 1)],
)
def test_spine_dimension(text: str, dim: int) -> None:
    basis = spine(MultiPoly.from_text(text, 2))
    assert basis.dim == dim
    assert not basis.degenerate


def test_spine_directions() -> None:
    e1 = spine(MultiPoly.from_text("x2^2 - y^2", 2))
    assert np.allclose(np.abs(e1.vectors), [[1.0, 0.0]])
    diag = spine(MultiPoly.from_text("x1^2 + 2 * x1 x2 + x2^2", 2))
    assert np.allclose(np.abs(diag.vectors), [[1 / np.sqrt(2), 1 / np.sqrt(2)]])
    assert diag.vectors[0, 0] * diag.vectors[0, 1] < 0


def test_spine_of_zero_trace_is_degenerate() -> None:
    basis = spine(MultiPoly.from_text("y^2", 2))
    assert basis.degenerate
    assert basis.dim == 2  # noqa: PLR2004


def test_spine_directions_leave_trace_invariant() -> None:
    p = ext_a(MultiPoly.from_text("x2^4 + x2^2 x3^2", 3), -0.25)
    basis = spine(p)
    assert basis.dim == 1
    rng = np.random.default_rng(0)
    xs = rng.uniform(-1, 1, size=(50, 3))
    for t in (0.3, -0.7):
        moved = xs + t * basis.vectors[0]
        assert np.allclose(p.values(moved), p.values(xs), atol=1e-12)


def test_nodal_set_equals_spine_for_order_two_blowup() -> None:
    p = ext_a(MultiPoly.from_text("x2^2", 2), 0.0)
    basis = spine(p)
    rng = np.random.default_rng(1)
    on_spine = rng.uniform(-1, 1, size=(20, 1)) * basis.vectors[0]
    off_spine = on_spine + np.array([0.0, 0.3])
    assert thin_zero_mask(p, on_spine).all()
    assert not thin_zero_mask(p, off_spine).any()


@pytest.mark.parametrize(
    ("poly", "kappa", "a"),
    [
        (quartic_singular_field(), 4, 0.0),
        (ext_a(MultiPoly.from_text("x1^2", 1), -0.5), 2, -0.5),
        (ext_a(MultiPoly.from_text("x1^2", 2), 0.5), 2, 0.5),
    ],
)
def test_membership_accepts(poly: MultiPoly, kappa: int, a: float) -> None:
    verdict = is_in_P_kappa(poly, kappa, a)
    assert verdict.member, verdict.failures


def test_membership_rejects_odd_cubic_with_witness() -> None:
    verdict = is_in_P_kappa(MultiPoly.from_text("x1^3", 1), 3, 0.0)
    assert not verdict.member
    assert {"kappa_even", "thin_nonnegative"} <= set(verdict.failures)
    assert verdict.witness == [-1.0]


def test_membership_reports_sign_witness_in_two_dimensions() -> None:
    p = ext_a(MultiPoly.from_text("x1^2 - x2^2", 2), 0.0)
    verdict = is_in_P_kappa(p, 2, 0.0, samples=256)
    assert verdict.failures == ["thin_nonnegative"]
    assert verdict.witness is not None
    x1, x2 = verdict.witness
    assert x1**2 - x2**2 < 0


def test_membership_rejects_non_harmonic() -> None:
    verdict = is_in_P_kappa(MultiPoly.from_text("x1^2 x2^2", 2), 4, 0.0)
    assert verdict.failures == ["a_harmonic"]
