from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Protocol, runtime_checkable

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy.ndimage import map_coordinates, spline_filter

from ..poly.multipoly import MultiPoly
from .grid import Grid

logger = structlog.get_logger(__name__)

PointFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]
ConstraintSet = Literal["thin", "very_thin"]
CONSTRAINT_SETS: tuple[str, ...] = ("thin", "very_thin")


@runtime_checkable
class FieldLike(Protocol):
    """Anything evaluable on ``(k, n + 1)`` point arrays: polynomials, grid fields, closed forms."""

    n: int

    def values(self, points: NDArray[np.float64]) -> NDArray[np.float64]: ...

    def gradients(self, points: NDArray[np.float64]) -> NDArray[np.float64]: ...


@dataclass(slots=True)
class SolveStats:
    sweeps: int
    converged: bool
    max_update: float
    nodal_residual: float
    energy_history: list[float] = field(default_factory=list)

    def to_event(self) -> dict[str, Any]:
        return {
            "sweeps": self.sweeps,
            "converged": self.converged,
            "max_update": self.max_update,
            "nodal_residual": self.nodal_residual,
            "final_energy": self.energy_history[-1] if self.energy_history else None,
        }


@dataclass(slots=True)
class ScalarField:
    """Nodal values on the half-domain grid; evaluation mirrors ``y -> |y|``."""

    grid: Grid
    values_array: NDArray[np.float64]
    label: str = ""
    stats: SolveStats | None = None
    _coeffs: NDArray[np.float64] | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.values_array.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values_array.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values_array)):
            raise ValueError("field has non-finite values")

    @property
    def n(self) -> int:
        return self.grid.n

    def _spline(self) -> NDArray[np.float64]:
        if self._coeffs is None:
            self._coeffs = np.asarray(spline_filter(self.values_array, order=3, mode="mirror"))
        return self._coeffs

    def _index_coords(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        width = self.grid.spec.half_width
        coords = np.empty((self.n + 1, pts.shape[0]))
        coords[: self.n] = ((pts[:, : self.n] + width) / self.grid.h).T
        coords[self.n] = np.abs(pts[:, self.n]) / self.grid.h
        return coords

    def values(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        coords = self._index_coords(points)
        return np.asarray(map_coordinates(self._spline(), coords, order=3, mode="mirror", prefilter=False))

    def gradients(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        step = 1e-3 * self.grid.h
        grads = np.empty_like(pts)
        for axis in range(self.n + 1):
            shift = np.zeros(self.n + 1)
            shift[axis] = step
            grads[:, axis] = (self.values(pts + shift) - self.values(pts - shift)) / (2.0 * step)
        return grads

    def thin_values(self) -> NDArray[np.float64]:
        return np.asarray(self.values_array[..., 0])

    def to_bytes(self) -> bytes:
        return np.ascontiguousarray(self.values_array, dtype="<f8").tobytes(order="C")


@dataclass(frozen=True, slots=True)
class AnalyticField:
    n: int
    value_fn: PointFunction
    gradient_fn: PointFunction
    label: str = ""

    def values(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(self.value_fn(np.atleast_2d(np.asarray(points, dtype=float))))

    def gradients(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(self.gradient_fn(np.atleast_2d(np.asarray(points, dtype=float))))

    @classmethod
    def from_poly(cls, poly: MultiPoly) -> AnalyticField:
        return cls(n=poly.n, value_fn=poly.values, gradient_fn=poly.gradients, label=poly.to_text())

    def dilated(self, factor: float) -> AnalyticField:
        """``X -> u(factor * X)``."""
        return AnalyticField(
            n=self.n,
            value_fn=lambda pts: self.value_fn(factor * pts),
            gradient_fn=lambda pts: factor * self.gradient_fn(factor * pts),
            label=f"{self.label}(x{factor})",
        )


def homogeneous_y_field(n: int, a: float) -> AnalyticField:
    """``-|y|^{1-a}``: zero on the thin space with constant flux density ``-2(1-a)``."""

    def value(pts: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(-np.abs(pts[:, n]) ** (1.0 - a))

    def gradient(pts: NDArray[np.float64]) -> NDArray[np.float64]:
        y = pts[:, n]
        out = np.zeros_like(pts)
        with np.errstate(divide="ignore"):
            dy = -(1.0 - a) * np.abs(y) ** (-a) * np.sign(y)
        out[:, n] = np.where(y == 0.0, 0.0, dy)
        return out

    return AnalyticField(n=n, value_fn=value, gradient_fn=gradient, label=f"-|y|^{1.0 - a:g}")


def very_thin_fundamental_field(n: int, a: float) -> AnalyticField:
    """``-(x_n^2 + y^2)^{-a/2}``: the homogeneous very-thin solution of degree ``-a`` (profile ``g = -1``)."""
    if a >= 0:
        raise ValueError(f"very-thin solutions need a < 0, got a={a}")
    lam = -a

    def value(pts: NDArray[np.float64]) -> NDArray[np.float64]:
        rho2 = pts[:, n - 1] ** 2 + pts[:, n] ** 2
        return np.asarray(-(rho2 ** (lam / 2.0)))

    def gradient(pts: NDArray[np.float64]) -> NDArray[np.float64]:
        rho2 = pts[:, n - 1] ** 2 + pts[:, n] ** 2
        out = np.zeros_like(pts)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(rho2 > 0.0, -lam * rho2 ** (lam / 2.0 - 1.0), 0.0)
        out[:, n - 1] = scale * pts[:, n - 1]
        out[:, n] = scale * pts[:, n]
        return out

    return AnalyticField(n=n, value_fn=value, gradient_fn=gradient, label=f"-rho^{lam:g}")


def sample_on_grid(grid: Grid, fn: PointFunction, label: str = "") -> ScalarField:
    values = np.asarray(fn(grid.node_points()), dtype=float).reshape(grid.shape)
    return ScalarField(grid=grid, values_array=values, label=label)


def _describe_function(fn: PointFunction | None) -> str:
    if fn is None:
        return "0"
    if isinstance(fn, MultiPoly):
        return fn.to_text()
    if isinstance(fn, AnalyticField):
        return fn.label
    return str(getattr(fn, "label", getattr(fn, "__name__", type(fn).__name__)))


@dataclass(frozen=True, slots=True)
class ObstacleSpec:
    """Constraint set, obstacle on it, and Dirichlet data on the cube boundary (even in y)."""

    constraint_set: str
    boundary: PointFunction
    obstacle: PointFunction | None = None

    def __post_init__(self) -> None:
        if self.constraint_set not in CONSTRAINT_SETS:
            raise ValueError(f"constraint_set must be one of {CONSTRAINT_SETS}, got {self.constraint_set!r}")

    def obstacle_values(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.obstacle is None:
            return np.zeros(len(points))
        return np.asarray(_call(self.obstacle, points), dtype=float)

    def boundary_values(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(_call(self.boundary, points), dtype=float)

    def describe(self) -> dict[str, str]:
        return {
            "constraint_set": self.constraint_set,
            "obstacle": _describe_function(self.obstacle),
            "boundary": _describe_function(self.boundary),
        }

    def digest(self) -> str:
        payload = json.dumps(self.describe(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()


def _call(fn: PointFunction, points: NDArray[np.float64]) -> NDArray[np.float64]:
    if isinstance(fn, AnalyticField):
        return fn.values(points)
    return fn(points)


@dataclass(frozen=True, slots=True)
class ResidualField:
    """``X -> base(X) - poly(X - center)``: the remainder after removing a recentred polynomial."""

    base: FieldLike
    poly: MultiPoly
    center: tuple[float, ...]

    @property
    def n(self) -> int:
        return self.base.n

    def _local(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        shift = np.zeros(self.n + 1)
        shift[: len(self.center)] = self.center
        return np.atleast_2d(np.asarray(points, dtype=float)) - shift

    def values(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(self.base.values(points) - self.poly.values(self._local(points)))

    def gradients(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(self.base.gradients(points) - self.poly.gradients(self._local(points)))


def as_field(source: FieldLike | MultiPoly) -> FieldLike:
    if isinstance(source, MultiPoly):
        return AnalyticField.from_poly(source)
    return source


def as_scalar_field(source: FieldLike) -> ScalarField | None:
    """Nodal grid representation when one exists (grid fields and remainders of grid fields)."""
    if isinstance(source, ScalarField):
        return source
    if isinstance(source, ResidualField):
        base = as_scalar_field(source.base)
        if base is None:
            return None
        points = base.grid.node_points()
        values = base.values_array - source.poly.values(source._local(points)).reshape(base.grid.shape)
        return ScalarField(grid=base.grid, values_array=values, label=f"{base.label}-poly")
    return None
