from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from src.thinobs.analysis import isolation_check, nondegeneracy_check, scan, stratum_flatness
from src.thinobs.poly import MultiPoly, ext_a, quartic_singular_field
from src.thinobs.poly.membership import thin_sphere_samples
from src.thinobs.solver import GridSpec, build_grid, sample_on_grid


def test_quartic_scan_strata() -> None:
    table = scan(quartic_singular_field(), 0.1, 0.0, extent=0.3)
    assert table.counts() == {"Sigma_2^1": 12, "Sigma_4^0": 1}

    origin = table.find([0.0, 0.0])
    assert origin is not None
    assert origin.kappa == 4  # noqa: PLR2004
    assert origin.m == 0
    assert origin.tag == "degenerate"

    axis = table.find([0.3, 0.0])
    assert axis is not None
    assert axis.stratum == "Sigma_2^1"
    assert axis.tag == "generic"
    assert axis.lambda_star == pytest.approx(3.0, abs=2e-2)
    assert axis.nxt
    assert not axis.anomalous
    assert all(entry.density[0] < 0.4 for entry in table.entries)  # noqa: PLR2004


def test_scan_is_sorted_and_thread_independent() -> None:
    serial = scan(quartic_singular_field(), 0.1, 0.0, extent=0.2)
    threaded = scan(quartic_singular_field(), 0.1, 0.0, extent=0.2, threads=3)
    assert serial.to_payload() == threaded.to_payload()
    points = [entry.point for entry in serial.entries]
    assert points == sorted(points)


def test_scan_verdicts_do_not_depend_on_the_seed() -> None:
    assert not np.allclose(thin_sphere_samples(2, 256, seed=0), thin_sphere_samples(2, 256, seed=1))
    first = scan(quartic_singular_field(), 0.1, 0.0, extent=0.2, seed=0)
    second = scan(quartic_singular_field(), 0.1, 0.0, extent=0.2, seed=1)
    assert len(first) > 0
    assert [(e.point, e.kappa, e.m, e.tag, e.nxt) for e in first.entries] == [
        (e.point, e.kappa, e.m, e.tag, e.nxt) for e in second.entries
    ]


def test_isolation_of_the_quartic_origin() -> None:
    table = scan(quartic_singular_field(), 0.1, 0.0, extent=0.3)
    verdict = isolation_check(table, [0.0, 0.0])
    assert verdict.isolated
    assert verdict.lower_order_nearby == 12  # noqa: PLR2004
    with pytest.raises(ValueError, match="m = 0"):
        isolation_check(table, [0.1, 0.0])
    with pytest.raises(ValueError, match="no table entry"):
        isolation_check(table, [0.15, 0.15])


def test_line_contact_set_is_flat() -> None:
    table = scan(ext_a(MultiPoly.from_text("x2^2", 2), 0.0), 0.1, 0.0, extent=0.3)
    assert table.counts() == {"Sigma_2^1": 7}
    assert all(abs(entry.point[1]) < 1e-12 for entry in table.entries)  # noqa: PLR2004
    assert stratum_flatness(table, 2, 1) < 1e-12  # noqa: PLR2004


def test_positive_field_has_no_free_boundary() -> None:
    table = scan(ext_a(MultiPoly.from_text("x1^2 + 1", 1), 0.0), 0.05, 0.0)
    assert len(table) == 0
    assert table.counts() == {}


def test_scan_table_writers(tmp_path: Path) -> None:
    table = scan(quartic_singular_field(), 0.1, 0.0, extent=0.1)
    lines = table.to_csv(tmp_path / "scan.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "point,kappa,m,lambda_star,stratum,tag,anomalous,nxt,confident"
    assert len(lines) == len(table) + 1
    assert "Sigma_4^0" in lines[1 + [e.point for e in table.entries].index((0.0, 0.0))]
    assert table.to_json(tmp_path / "scan.json").exists()


def test_grid_scan_validates_spacing_and_extent() -> None:
    grid = build_grid(GridSpec(n=1, res=33, a=0.0))
    field = sample_on_grid(grid, ext_a(MultiPoly.from_text("x1^2", 1), 0.0))
    with pytest.raises(ValueError, match="finer than the grid step"):
        scan(field, 0.01, 0.0)
    with pytest.raises(ValueError, match="no room"):
        scan(field, 0.1, 0.0, extent=0.9)
    with pytest.raises(ValueError, match="positive"):
        scan(field, 0.0, 0.0)


def test_nondegeneracy_exact_for_quadratics() -> None:
    verdict = nondegeneracy_check(MultiPoly.from_text("-x1^2 - x2^2", 2), 1.0)
    assert verdict.exact
    assert verdict.satisfied
    assert verdict.margin == pytest.approx(4.0)


def test_nondegeneracy_fails_for_flat_quartic() -> None:
    verdict = nondegeneracy_check(MultiPoly.from_text("-x1^4", 2), 1.0, samples=256)
    assert not verdict.exact
    assert not verdict.satisfied
    assert verdict.sup_laplacian == pytest.approx(0.0, abs=1e-12)
