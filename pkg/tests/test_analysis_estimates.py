from __future__ import annotations

import pytest

from src.thinobs.analysis import directional_regularity, linf_l2_ratio
from src.thinobs.poly import MultiPoly, ext_a


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5])
def test_linf_l2_ratio_scales_like_the_weighted_volume(a: float) -> None:
    u = ext_a(MultiPoly.from_text("x1^2 - x2^2", 2), a)
    wide = linf_l2_ratio(u, a, radius=0.5)
    narrow = linf_l2_ratio(u, a, radius=0.25)
    assert narrow / wide == pytest.approx(2.0 ** ((2 + 1 + a) / 2.0), rel=1e-8)


def test_linf_l2_ratio_of_zero_field() -> None:
    assert linf_l2_ratio(MultiPoly.zero(1), 0.0) == 0.0


def test_directional_second_derivative_of_quadratic() -> None:
    u = ext_a(MultiPoly.from_text("x1^2", 1), -0.4)
    stats = directional_regularity(u, [1.0])
    assert stats.min_second == pytest.approx(2.0, abs=1e-4)
    assert stats.max_first <= 0.5 + 1e-9  # noqa: PLR2004


def test_directional_regularity_rejects_zero_direction() -> None:
    with pytest.raises(ValueError, match="non-zero"):
        directional_regularity(MultiPoly.from_text("x1^2", 1), [0.0])
