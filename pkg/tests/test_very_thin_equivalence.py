from __future__ import annotations

import numpy as np
import pytest

from src.thinobs.very_thin import LineFunction, equivalence_chain, line_obstacle_solve


@pytest.mark.slow
def test_box_and_line_solutions_are_compared_on_the_line() -> None:
    report = equivalence_chain(LineFunction.bump(0.0, 0.5), -0.5, res=17, nodes=101)
    assert report.x.shape == report.w1.shape == report.w3.shape == (17,)
    assert (report.w1 >= report.obstacle - 1e-8).all()
    assert 0.0 <= report.overlap <= 1.0
    assert report.contact_discrepancy <= report.line_discrepancy
    payload = report.to_payload()
    assert payload["res"] == 17  # noqa: PLR2004
    assert set(payload["samples"]) == {"x", "obstacle", "w1", "w3"}


@pytest.mark.slow
def test_bump_restrictions_agree_within_two_percent() -> None:
    report = equivalence_chain(LineFunction.bump(0.0, 0.5), -0.5, res=65)
    assert report.line_discrepancy <= 0.02  # noqa: PLR2004
    assert report.contact_discrepancy <= 0.02  # noqa: PLR2004
    assert report.contact_line.any()


def test_nonpositive_obstacle_gives_zero_solutions() -> None:
    report = equivalence_chain(LineFunction.bump(0.0, 0.5, height=-1.0), -0.5, res=17, nodes=101)
    np.testing.assert_allclose(report.w1, 0.0, atol=1e-12)
    np.testing.assert_allclose(report.w3, 0.0, atol=1e-12)
    assert not report.contact_box.any()
    assert not report.contact_line.any()


def test_doubling_the_obstacle_does_not_shrink_the_line_contact_set() -> None:
    psi = LineFunction.bump(0.0, 0.5)
    single = line_obstacle_solve(psi, -0.5, nodes=101)
    double = line_obstacle_solve(psi.scaled(2.0), -0.5, nodes=101, tol=2e-10)
    assert single.converged and double.converged
    assert single.contact.any()
    assert (double.contact | ~single.contact).all()
    first, second = single.contact_interval(), double.contact_interval()
    assert first is not None and second is not None
    assert second[0] <= first[0] and first[1] <= second[1]


def test_obstacle_support_must_stay_inside_the_box() -> None:
    with pytest.raises(ValueError, match=r"inside \(-0.9, 0.9\)"):
        equivalence_chain(LineFunction.bump(0.0, 0.95), -0.5)


def test_equivalence_needs_negative_weight() -> None:
    with pytest.raises(ValueError, match="needs a in"):
        equivalence_chain(LineFunction.bump(0.0, 0.5), 0.2)
