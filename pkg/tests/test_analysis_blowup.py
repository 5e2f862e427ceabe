from __future__ import annotations

import numpy as np
import pytest

from src.thinobs.analysis import (
    classify_second_blowup,
    first_blowup,
    homogeneity_fit,
    nxt_membership,
    second_blowup,
)
from src.thinobs.poly import MultiPoly, ext_a, quartic_singular_field, spine
from src.thinobs.solver import very_thin_fundamental_field


def _ext(text: str, n: int, a: float) -> MultiPoly:
    return ext_a(MultiPoly.from_text(text, n), a)


@pytest.mark.parametrize("a", [-0.4, 0.0, 0.3])
def test_quadratic_plus_cubic_is_generic_with_polynomial_next_term(a: float) -> None:
    p = _ext("x1^2", 2, a)
    q = _ext("x1^2 x2", 2, a) * 0.1
    first = first_blowup(p + q, a, [0.0, 0.0])

    assert first.ok
    assert first.kappa == 2  # noqa: PLR2004
    assert first.confident
    assert first.p_star is not None
    assert (first.p_star - p).max_abs_coeff() < 1e-8  # noqa: PLR2004

    report = second_blowup(p + q, a, first)
    assert report.m == 1
    assert np.allclose(np.abs(report.spine.vectors[0]), [0.0, 1.0], atol=1e-9)
    assert report.case == "polynomial"
    assert report.lambda_star == pytest.approx(3.0, abs=1e-3)
    assert report.stratum == "generic"
    assert report.q is not None
    assert (report.q - q).max_abs_coeff() < 1e-6  # noqa: PLR2004
    assert abs(report.orthogonality["q_p_star"]) < 1e-8  # noqa: PLR2004
    assert abs(report.orthogonality["q_2p_minus_p"]) < 1e-6  # noqa: PLR2004
    doubled, halved = report.orthogonality["q_2p_minus_p"], report.orthogonality["q_half_p_minus_p"]
    assert halved == pytest.approx(-0.5 * doubled, abs=1e-12)

    flags = nxt_membership(report)
    assert flags.polynomial_next
    assert flags.derivatives_vanish
    assert flags.norm_matches
    assert flags.member


def test_quartic_off_origin_blows_up_to_scaled_quadratic() -> None:
    u = quartic_singular_field()
    first = first_blowup(u, 0.0, [0.3, 0.0])
    assert first.kappa == 2  # noqa: PLR2004
    assert first.p_star is not None
    expected = _ext("x2^2", 2, 0.0) * 0.09
    assert (first.p_star - expected).max_abs_coeff() < 1e-6  # noqa: PLR2004

    report = second_blowup(u, 0.0, first)
    assert report.m == 1
    assert report.case == "polynomial"
    assert report.lambda_star == pytest.approx(3.0, abs=2e-2)
    assert report.q is not None
    assert (report.q - _ext("x1 x2^2", 2, 0.0) * 0.6).max_abs_coeff() < 1e-4  # noqa: PLR2004
    assert nxt_membership(report).member


def test_quartic_at_origin_is_degenerate() -> None:
    u = quartic_singular_field()
    first = first_blowup(u, 0.0, [0.0, 0.0])
    assert first.kappa == 4  # noqa: PLR2004
    report = second_blowup(u, 0.0, first)
    assert report.case == "degenerate"
    assert report.stratum == "degenerate"
    assert report.m == 0
    assert report.lambda_star is None
    assert report.notice is not None
    assert "noise floor" in report.notice
    assert not nxt_membership(report).member


def test_regular_point_is_not_singular() -> None:
    u = _ext("x1^2 - 0.5", 1, 0.0)
    first = first_blowup(u, 0.0, [0.0])
    assert not first.ok
    assert first.notice is not None
    assert first.notice.startswith("not a singular point")
    with pytest.raises(ValueError, match="successful first blow-up"):
        second_blowup(u, 0.0, first)


def test_payloads_are_plain_json_types() -> None:
    p = _ext("x1^2", 1, 0.0)
    first = first_blowup(p + _ext("x1^3", 1, 0.0) * 0.2, 0.0, [0.0])
    payload = first.to_payload()
    assert payload["kappa"] == 2  # noqa: PLR2004
    assert isinstance(payload["p_star"], str)
    report = second_blowup(p + _ext("x1^3", 1, 0.0) * 0.2, 0.0, first).to_payload()
    assert report["stratum"] == "generic"
    assert report["m"] == 0
    assert report["gap"] == pytest.approx(1.0, abs=1e-3)


def test_homogeneity_fit_recovers_power_law() -> None:
    radii = np.geomspace(0.01, 0.1, 10)
    value, error = homogeneity_fit(radii, 3.0 * radii**5)
    assert value == pytest.approx(2.5, abs=1e-9)
    assert error < 1e-9  # noqa: PLR2004

    value, error = homogeneity_fit(radii[:3], radii[:3] ** 6)
    assert value == pytest.approx(3.0, abs=1e-9)
    assert np.isnan(error)


def test_classification_of_non_homogeneous_profile() -> None:
    basis = spine(_ext("x1^2", 1, 0.0))
    verdict = classify_second_blowup(MultiPoly.from_text("x1^3 + x1", 1), basis, 0.0, 2)
    assert verdict.case == "unclassified"
    assert verdict.residuals["homogeneity"] == 1.0


def test_classification_of_very_thin_profile() -> None:
    a = -0.5
    basis = spine(_ext("x2^2", 2, a))
    assert basis.dim == 1
    verdict = classify_second_blowup(very_thin_fundamental_field(2, a), basis, a, 2)
    assert verdict.case == "very_thin_solution"
    assert verdict.residuals["max_flux"] < 0.0
    assert verdict.residuals["complementarity"] == pytest.approx(0.0, abs=1e-12)


def test_first_blowup_membership_is_seed_independent() -> None:
    u = quartic_singular_field()
    runs = [first_blowup(u, 0.0, [0.3, 0.0], seed=seed) for seed in (0, 1)]
    assert all(run.membership is not None and run.membership.member for run in runs)
    assert runs[0].p_star is not None and runs[1].p_star is not None
    assert (runs[0].p_star - runs[1].p_star).max_abs_coeff() == 0.0
