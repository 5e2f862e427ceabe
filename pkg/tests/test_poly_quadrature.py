from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import gamma

from src.thinobs.poly import (
    MultiPoly,
    ball_rule,
    counterexample_pair,
    ext_a,
    half_circle_rule,
    multi_indices,
    pkappa_basis,
    probe_set,
    sphere_inner,
    sphere_rule,
)


def _closed_form_sphere_moment(exponents: list[float]) -> float:
    betas = [(e + 1.0) / 2.0 for e in exponents]
    return 2.0 * math.prod(gamma(b) for b in betas) / gamma(sum(betas))


def test_circle_length() -> None:
    one = MultiPoly.constant(1, 1.0)
    assert sphere_inner(one, one, 0.0) == pytest.approx(2 * math.pi, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("a", [-0.5, 0.0, 0.3])
def test_sphere_moments_match_beta_values(n: int, a: float) -> None:
    rule = sphere_rule(n, a, 8, 10)
    for degree in (0, 2, 4):
        for alpha in multi_indices(n, degree):
            for k in (0, 1):
                exps = [2 * e for e in alpha] + [2 * k]
                mono = MultiPoly.monomial(n, exps)
                numeric = rule.integrate(mono.values(rule.points))
                exact = _closed_form_sphere_moment([float(e) for e in exps[:-1]] + [2 * k + a])
                assert numeric == pytest.approx(exact, rel=1e-12)


def test_ball_rule_volume() -> None:
    rule = ball_rule(2, -0.5, 12, 8)
    sphere_mass = _closed_form_sphere_moment([0.0, 0.0, -0.5])
    assert rule.integrate(np.ones(len(rule.weights))) == pytest.approx(sphere_mass / 2.5, rel=1e-12)


def test_half_circle_rule_integrates_weight() -> None:
    a = -0.5
    theta, weights = half_circle_rule(a, 24)
    expected = math.sqrt(math.pi) * gamma((a + 1) / 2) / gamma(a / 2 + 1)
    assert float(np.sum(weights)) == pytest.approx(expected, rel=1e-10)
    assert float(np.dot(weights, np.cos(theta) ** 2)) == pytest.approx(
        expected / (a + 2), rel=1e-10
    )


def test_odd_times_even_is_orthogonal() -> None:
    a = -0.5
    p = ext_a(MultiPoly.from_text("x1", 2), a)
    q = ext_a(MultiPoly.from_text("x1^2", 2), a)
    assert abs(sphere_inner(p, q, a)) <= 1e-13


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.4])
def test_distinct_homogeneities_are_orthogonal(a: float) -> None:
    rng = np.random.default_rng(7)
    for _ in range(20):
        d1, d2 = rng.choice(5, size=2, replace=False)
        first = pkappa_basis(2, int(d1), a)
        second = pkappa_basis(2, int(d2), a)
        p = first[int(rng.integers(len(first)))]
        q = second[int(rng.integers(len(second)))]
        scale = math.sqrt(sphere_inner(p, p, a) * sphere_inner(q, q, a))
        assert abs(sphere_inner(p, q, a)) <= 1e-12 * max(scale, 1.0)


@pytest.mark.parametrize("b", [Fraction(-1, 3), Fraction(-1, 4), Fraction(-1, 8)])
def test_counterexample_pair_orthogonality_and_probes(b: Fraction) -> None:
    p_star, q = counterexample_pair(b)
    assert abs(sphere_inner(q, p_star, 0.0)) <= 1e-10
    for probe in probe_set(2, 4, 0.0):
        assert sphere_inner(q, probe, 0.0) <= 1e-10


def test_counterexample_probe_fails_outside_range() -> None:
    _, q = counterexample_pair(Fraction(0))
    values = [sphere_inner(q, probe, 0.0) for probe in probe_set(2, 4, 0.0)]
    assert max(values) > 1e-3
