from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from src.thinobs.solver import GridSpec, build_grid
from src.thinobs.very_thin import KernelSpec, LineFunction, extend, extend_on_grid, kernel_check, kernel_eval


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("a", [-0.7, -0.3])
def test_kernel_has_unit_mass_and_scales(n: int, a: float) -> None:
    check = kernel_check(KernelSpec.build(n, a))
    assert check.max_mass_error < 1e-6  # noqa: PLR2004
    assert check.max_scaling_error < 1e-12  # noqa: PLR2004
    assert check.max_radial_error < 1e-12  # noqa: PLR2004
    assert check.passed


def test_kernel_rejects_unsupported_parameters() -> None:
    with pytest.raises(ValueError, match="finite mass"):
        KernelSpec.build(2, 0.0)
    with pytest.raises(ValueError, match="n must be"):
        KernelSpec.build(4, -0.5)
    with pytest.raises(ValueError, match="singular"):
        kernel_eval(KernelSpec.build(2, -0.5), 0.3, 0.0, 0.0)


def test_line_function_validation(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="at least 8"):
        LineFunction(x=np.linspace(0.0, 1.0, 4), values=np.zeros(4))
    with pytest.raises(ValueError, match="increasing"):
        LineFunction(x=np.linspace(1.0, 0.0, 10), values=np.zeros(10))
    bump = LineFunction.bump(0.1, 0.4)
    assert bump.decays()
    assert bump.support == pytest.approx((-0.3, 0.5))
    restored = LineFunction.from_csv(bump.to_csv(tmp_path / "bump.csv"))
    assert np.allclose(restored.values, bump.values)


def test_extension_trace_and_maximum_principle() -> None:
    spec = KernelSpec.build(2, -0.5)
    line = LineFunction.bump(0.0, 0.5)
    ext = extend(spec, line)
    on_line = np.array([[-0.2, 0.0, 0.0], [0.0, 0.0, 0.0], [0.3, 0.0, 0.0]])
    assert np.allclose(ext.values(on_line), line(on_line[:, 0]))

    rng = np.random.default_rng(3)
    points = rng.uniform(-0.8, 0.8, size=(20, 3))
    values = ext.values(points)
    assert (values >= 0.0).all()
    assert (values <= 1.0 + 1e-9).all()

    rotated = points.copy()
    rotated[:, 1] = np.hypot(points[:, 1], points[:, 2])
    rotated[:, 2] = 0.0
    assert np.allclose(ext.values(rotated), values, rtol=1e-12)


def test_extension_requires_decay_and_plane() -> None:
    ramp = LineFunction.from_callable(lambda t: 1.0 + t, -1.0, 1.0, 64)
    with pytest.raises(ValueError, match="does not decay"):
        extend(KernelSpec.build(2, -0.5), ramp)
    with pytest.raises(ValueError, match="n = 2"):
        extend(KernelSpec.build(3, -0.5), LineFunction.bump())
    grid = build_grid(GridSpec(n=2, res=17, a=-0.3))
    with pytest.raises(ValueError, match="disagree"):
        extend_on_grid(KernelSpec.build(2, -0.5), LineFunction.bump(), grid)
