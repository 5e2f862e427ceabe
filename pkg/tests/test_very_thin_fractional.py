from __future__ import annotations

import math

import numpy as np
import pytest

from src.thinobs.very_thin import (
    LineFunction,
    fractional_constant,
    fractional_laplacian_direct,
    line_obstacle_solve,
    line_source_potential,
    riesz_matrix,
)


def test_fractional_constant_at_one_half() -> None:
    assert fractional_constant(0.5) == pytest.approx(1.0 / math.pi, rel=1e-12)
    with pytest.raises(ValueError, match="sigma"):
        fractional_constant(1.0)


def test_direct_fractional_laplacian_is_positive_at_bump_peak() -> None:
    bump = LineFunction.bump(0.0, 0.5)
    values = fractional_laplacian_direct(bump, [0.0, 2.0], 0.25)
    assert values[0] > 0.0
    assert values[1] < 0.0


def test_riesz_matrix_is_symmetric_with_dominant_diagonal() -> None:
    x = np.linspace(-0.5, 0.5, 41)
    matrix = riesz_matrix(x, -0.5)
    assert np.allclose(matrix, matrix.T)
    assert (np.diag(matrix) >= matrix.max(axis=1) - 1e-14).all()


def test_line_obstacle_solution_is_complementary() -> None:
    psi = LineFunction.bump(0.0, 0.5)
    solution = line_obstacle_solve(psi, -0.5, nodes=101)
    scale = float(np.abs(solution.obstacle).max())
    assert solution.converged
    assert (solution.density >= 0.0).all()
    assert (solution.w >= solution.obstacle - 1e-8 * scale).all()
    active = solution.density > 0.0
    assert np.abs(solution.w[active] - solution.obstacle[active]).max() < 1e-7 * scale  # noqa: PLR2004
    interval = solution.contact_interval()
    assert interval is not None
    assert -0.5 < interval[0] <= 0.0 <= interval[1] < 0.5  # noqa: PLR2004


def test_line_solution_extends_off_the_line() -> None:
    psi = LineFunction.bump(0.0, 0.5)
    solution = line_obstacle_solve(psi, -0.5, nodes=101)
    near = line_source_potential(solution, np.array([[0.0, 0.0, 0.0]]))
    assert near[0] == pytest.approx(solution.w[50])
    far = line_source_potential(solution, np.array([[0.0, 0.3, 0.4], [0.0, 0.6, 0.8]]))
    assert far[0] > far[1] > 0.0
    with pytest.raises(ValueError, match="points"):
        line_source_potential(solution, np.zeros((2, 2)))


def test_negative_obstacle_is_trivial() -> None:
    psi = LineFunction.bump(0.0, 0.5, height=-1.0)
    solution = line_obstacle_solve(psi, -0.5, nodes=51)
    assert solution.sweeps == 0
    assert not solution.contact.any()
    assert solution.contact_interval() is None


def test_line_solve_requires_negative_weight() -> None:
    with pytest.raises(ValueError, match=r"a in \(-1, 0\)"):
        line_obstacle_solve(LineFunction.bump(), 0.3)
