from __future__ import annotations

import numpy as np
import pytest
from scipy.special import beta

from src.thinobs.solver import homogeneous_y_field, very_thin_fundamental_field
from src.thinobs.very_thin import KernelSpec, LineFunction, circle_flux, f_a_flux, flux_check, symbol_check


@pytest.mark.parametrize("a", [-0.75, -0.5, -0.25])
def test_fundamental_solution_flux_is_closed_form(a: float) -> None:
    expected = a * 2.0 * beta((a + 1.0) / 2.0, 0.5)
    for eps in (1e-3, 1e-2, 0.1):
        value = f_a_flux(very_thin_fundamental_field(2, a), np.zeros((1, 1)), a, eps=eps)[0]
        assert value == pytest.approx(expected, rel=1e-10)


def test_y_power_has_linear_circle_flux() -> None:
    a = -0.5
    value = circle_flux(homogeneous_y_field(2, a), np.zeros((1, 1)), 0.02, a, order=256)[0]
    assert value == pytest.approx(-4.0 * (1.0 - a) * 0.02, rel=1e-6)


def test_flux_check_payload() -> None:
    check = flux_check(-0.5)
    assert check.passed
    payload = check.to_payload()
    assert payload["check"] == "flux"
    assert payload["fundamental"] < 0.0
    with pytest.raises(ValueError, match=r"a in \(-1, 0\)"):
        flux_check(0.2)


def test_circle_flux_rejects_bad_radius() -> None:
    with pytest.raises(ValueError, match="positive"):
        circle_flux(homogeneous_y_field(2, -0.5), np.zeros((1, 1)), 0.0, -0.5)


def test_symbol_ratio_is_shared_by_all_bumps() -> None:
    spec = KernelSpec.build(2, -0.5)
    lines = [LineFunction.bump(0.0, width) for width in (0.5, 0.7, 0.9)]
    check = symbol_check(spec, lines)
    assert len(check.constants) == 3  # noqa: PLR2004
    assert all(c != 0.0 for c in check.constants)
    assert len({np.sign(c) for c in check.constants}) == 1
    assert check.consistent


def test_symbol_check_needs_the_line() -> None:
    with pytest.raises(ValueError, match="n = 2"):
        symbol_check(KernelSpec.build(3, -0.5), [LineFunction.bump()])
    with pytest.raises(ValueError, match="at least one"):
        symbol_check(KernelSpec.build(2, -0.5), [])
