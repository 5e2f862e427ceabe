from __future__ import annotations

import numpy as np
import pytest

from src.thinobs.poly import MultiPoly, ext_a
from src.thinobs.very_thin import profile_from_poly, verify_homogeneous_2d


@pytest.mark.parametrize("a", [-0.5, -0.2])
def test_extended_quadratic_is_a_polynomial_solution(a: float) -> None:
    g = profile_from_poly(ext_a(MultiPoly.from_text("x1^2", 1), a))
    verdict = verify_homogeneous_2d(g, 2.0, a)
    assert verdict.valid, verdict.reasons
    assert verdict.subcase == "polynomial"
    assert verdict.origin_flux == 0.0
    assert verdict.polynomial is not None
    assert verdict.polynomial_residual is not None
    assert verdict.polynomial_residual < 1e-8  # noqa: PLR2004


def test_negative_constant_profile_is_the_fractional_solution() -> None:
    verdict = verify_homogeneous_2d(lambda theta: -np.ones_like(theta), 0.5, -0.5)
    assert verdict.valid, verdict.reasons
    assert verdict.subcase == "fractional"
    assert verdict.origin_flux < 0.0
    assert verdict.to_payload()["polynomial"] is None


def test_positive_constant_profile_has_wrong_measure_sign() -> None:
    verdict = verify_homogeneous_2d(lambda theta: np.ones_like(theta), 0.5, -0.5)
    assert not verdict.valid
    assert "origin_measure_sign" in verdict.reasons


def test_non_admissible_homogeneity() -> None:
    g = profile_from_poly(ext_a(MultiPoly.from_text("x1^2", 1), -0.5))
    verdict = verify_homogeneous_2d(g, 1.5, -0.5)
    assert not verdict.valid
    assert not verdict.admissible_homogeneity
    assert "homogeneity_not_admissible" in verdict.reasons


def test_sampled_profile_input() -> None:
    a = -0.5
    g = profile_from_poly(ext_a(MultiPoly.from_text("x1^2", 1), a))
    theta = np.linspace(0.0, np.pi, 801)
    verdict = verify_homogeneous_2d((theta, g(theta)), 2.0, a)
    assert verdict.valid, verdict.reasons


def test_profiles_need_planar_polynomials() -> None:
    with pytest.raises(ValueError, match="n = 1"):
        profile_from_poly(MultiPoly.from_text("x1^2", 2))
