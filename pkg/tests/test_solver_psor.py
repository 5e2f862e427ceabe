from __future__ import annotations

import numpy as np
import pytest
from numpy.typing import NDArray

from src.thinobs.poly import MultiPoly, ext_a, quartic_singular_field
from src.thinobs.solver import (
    GridSpec,
    ObstacleSpec,
    ScalarField,
    build_grid,
    discrete_energy,
    homogeneous_y_field,
    kkt_report,
    residual_solve,
    sample_on_grid,
    solve,
)


def _ones(points: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.ones(len(points))


def _relative_l2(field: ScalarField, exact: NDArray[np.float64]) -> float:
    return float(np.linalg.norm(field.values_array - exact) / np.linalg.norm(exact))


def test_constant_data_gives_constant_solution() -> None:
    grid = build_grid(GridSpec(n=1, res=33, a=-0.5))
    field = solve(grid, ObstacleSpec("thin", boundary=_ones))
    assert np.allclose(field.values_array, 1.0, atol=1e-6)


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5])
def test_homogeneous_y_solution_and_flux(a: float) -> None:
    grid = build_grid(GridSpec(n=1, res=33, a=a))
    exact = homogeneous_y_field(1, a)
    spec = ObstacleSpec("thin", boundary=exact.values)
    field = solve(grid, spec)
    target = exact.values(grid.node_points()).reshape(grid.shape)
    assert np.abs(field.values_array - target).max() < 1e-5
    report = kkt_report(field, spec)
    assert np.allclose(report.flux_density, -2.0 * (1.0 - a), rtol=1e-3)
    assert report.max_obstacle_violation == 0.0


def test_homogeneous_y_field_sampled_is_discretely_exact() -> None:
    a = -0.5
    grid = build_grid(GridSpec(n=2, res=17, a=a))
    exact = homogeneous_y_field(2, a)
    sampled = sample_on_grid(grid, exact.values)
    report = kkt_report(sampled, ObstacleSpec("thin", boundary=exact.values))
    assert np.allclose(report.flux_density, -3.0, rtol=1e-12)
    assert report.max_complementarity < 1e-12
    assert report.interior_residual < 1e-12


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5])
def test_ext_square_boundary_data_is_recovered(a: float) -> None:
    grid = build_grid(GridSpec(n=1, res=65, a=a))
    poly = ext_a(MultiPoly.from_text("x1^2", 1), a)
    field = solve(grid, ObstacleSpec("thin", boundary=poly))
    exact = poly.values(grid.node_points()).reshape(grid.shape)
    assert _relative_l2(field, exact) <= 0.02  # noqa: PLR2004


@pytest.mark.slow
@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5])
def test_ext_square_fidelity_at_full_resolution(a: float) -> None:
    grid = build_grid(GridSpec(n=1, res=257, a=a))
    poly = ext_a(MultiPoly.from_text("x1^2", 1), a)
    field = solve(grid, ObstacleSpec("thin", boundary=poly))
    exact = poly.values(grid.node_points()).reshape(grid.shape)
    assert _relative_l2(field, exact) <= 0.02  # noqa: PLR2004


def test_refinement_reduces_error() -> None:
    a = -0.5
    poly = ext_a(MultiPoly.from_text("x1^2", 1), a)
    errors = []
    for res in (33, 65, 129):
        grid = build_grid(GridSpec(n=1, res=res, a=a))
        field = solve(grid, ObstacleSpec("thin", boundary=poly))
        errors.append(_relative_l2(field, poly.values(grid.node_points()).reshape(grid.shape)))
    assert errors[0] > errors[1] > errors[2]


def test_energy_is_non_increasing_and_solution_is_minimal() -> None:
    a = -0.5
    grid = build_grid(GridSpec(n=1, res=33, a=a))
    poly = ext_a(MultiPoly.from_text("x1^2 - 0.1", 1), a)
    spec = ObstacleSpec("thin", boundary=poly)
    field = solve(grid, spec, tol=1e-10)
    assert field.stats is not None
    history = np.array(field.stats.energy_history)
    assert (np.diff(history) <= 1e-12 * np.abs(history[:-1]).max()).all()

    rng = np.random.default_rng(0)
    interior = ~grid.boundary_mask()
    thin = grid.thin_mask()
    best = discrete_energy(field)
    for _ in range(5):
        trial = field.values_array.copy()
        trial[interior] += 1e-2 * rng.standard_normal(int(interior.sum()))
        trial[thin] = np.maximum(trial[thin], 0.0)
        assert discrete_energy(ScalarField(grid=grid, values_array=trial)) >= best - 1e-12


def test_complementarity_and_sign_on_contact_problem() -> None:
    a = -0.5
    grid = build_grid(GridSpec(n=1, res=65, a=a))
    poly = ext_a(MultiPoly.from_text("x1^2 - 0.5", 1), a)
    spec = ObstacleSpec("thin", boundary=poly)
    field = solve(grid, spec)
    report = kkt_report(field, spec)
    assert report.max_obstacle_violation == 0.0
    assert report.max_positive_flux <= 1e-3
    assert np.abs(report.complementarity_defect()).max() <= 1e-3
    origin = grid.mid - 1
    assert report.gap[origin] == 0.0
    assert report.flux_density[origin] < 0.0


def test_kkt_report_of_a_harmonic_polynomial_has_zero_flux() -> None:
    grid = build_grid(GridSpec(n=2, res=17, a=0.0))
    poly = ext_a(MultiPoly.from_text("x1^2", 2), 0.0)
    report = kkt_report(sample_on_grid(grid, poly), ObstacleSpec("thin", boundary=poly))
    assert np.abs(report.flux_density).max() < 1e-12
    assert report.interior_residual < 1e-12


def test_kkt_report_measures_obstacle_deficit() -> None:
    grid = build_grid(GridSpec(n=1, res=17, a=0.0))
    poly = ext_a(MultiPoly.from_text("x1^2", 1), 0.0)
    field = sample_on_grid(grid, poly)
    field.values_array[grid.mid, 0] -= 0.01
    report = kkt_report(field, ObstacleSpec("thin", boundary=poly))
    assert report.max_obstacle_violation == pytest.approx(0.01, abs=1e-15)


def test_inadmissible_boundary_data_is_rejected() -> None:
    grid = build_grid(GridSpec(n=1, res=17, a=0.0))
    with pytest.raises(ValueError, match="inadmissible"):
        solve(grid, ObstacleSpec("thin", boundary=lambda pts: -np.ones(len(pts))))


def test_very_thin_constraint_needs_negative_weight() -> None:
    grid = build_grid(GridSpec(n=2, res=17, a=0.0))
    with pytest.raises(ValueError, match="capacity"):
        solve(grid, ObstacleSpec("very_thin", boundary=_ones))


def test_residual_solve_rejects_odd_base() -> None:
    grid = build_grid(GridSpec(n=1, res=17, a=0.0))
    with pytest.raises(ValueError, match="P_kappa"):
        residual_solve(grid, ObstacleSpec("thin", boundary=_ones), MultiPoly.from_text("x1^3", 1))


def test_residual_solve_matches_shifted_solve() -> None:
    grid = build_grid(GridSpec(n=2, res=33, a=0.0))
    quartic = quartic_singular_field()
    spec = ObstacleSpec("thin", boundary=quartic)
    v = residual_solve(grid, spec, quartic, tol=1e-9)
    u = solve(grid, spec, tol=1e-9)
    base = quartic.values(grid.node_points()).reshape(grid.shape)
    assert np.abs(v.values_array - (u.values_array - base)).max() < 1e-6
    assert np.abs(v.values_array).max() < 1e-2


def test_residual_solve_recovers_cubic_correction() -> None:
    a = 0.0
    grid = build_grid(GridSpec(n=2, res=33, a=a))
    base = ext_a(MultiPoly.from_text("x1^2", 2), a)
    correction = ext_a(MultiPoly.from_text("x1^2 x2", 2), a) * 0.1
    v = residual_solve(grid, ObstacleSpec("thin", boundary=base + correction), base, tol=1e-9)
    expected = correction.values(grid.node_points()).reshape(grid.shape)
    assert np.abs(v.values_array - expected).max() < 1e-5
