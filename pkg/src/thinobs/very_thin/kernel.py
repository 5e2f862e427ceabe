"""Poisson kernel of the very thin space and the extension operator it defines.

    P_a(x', x_n, y) = C_{n,a} (x_n^2 + y^2)^{-a/2} / (|x'|^2 + x_n^2 + y^2)^{(n-1-a)/2}

The kernel has finite mass in ``x'`` only for ``a < 0``; ``C_{n,a}`` is fixed numerically by unit mass.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable

import numpy as np
import structlog
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from ..solver.fields import ScalarField, sample_on_grid
from ..solver.grid import Grid
from ..util.fs import atomic_write_text

logger = structlog.get_logger(__name__)

LineCallable = Callable[[NDArray[np.float64]], NDArray[np.float64]]
DECAY_TOL = 1e-10


@lru_cache(maxsize=32)
def _unit_mass_integral(n: int, a: float) -> float:
    """``int_{R^{n-1}} (1 + |z|^2)^{-(n-1-a)/2} dz``."""
    if n == 1:
        return 1.0
    power = -(n - 1 - a) / 2.0
    sphere_area = 2.0 * math.pi ** ((n - 1) / 2.0) / math.gamma((n - 1) / 2.0)
    value, _ = quad(lambda r: r ** (n - 2) * (1.0 + r * r) ** power, 0.0, np.inf, limit=200, epsabs=0.0, epsrel=1e-13)
    return sphere_area * value


@dataclass(frozen=True, slots=True)
class KernelSpec:
    n: int
    a: float
    normalization: float

    @classmethod
    def build(cls, n: int, a: float) -> KernelSpec:
        if n not in (1, 2, 3):
            raise ValueError(f"n must be 1, 2 or 3, got {n}")
        if not -1.0 < a < 0.0:
            raise ValueError(f"the very thin kernel has finite mass only for a in (-1, 0), got a={a}")
        constant = 1.0 / _unit_mass_integral(n, float(a))
        logger.debug("kernel.normalized", n=n, a=a, normalization=constant)
        return cls(n=n, a=float(a), normalization=constant)

    def to_payload(self) -> dict[str, Any]:
        return {"n": self.n, "a": self.a, "normalization": self.normalization}


def kernel_eval(
    spec: KernelSpec,
    x_prime: NDArray[np.float64] | float,
    x_n: NDArray[np.float64] | float,
    y: NDArray[np.float64] | float,
) -> NDArray[np.float64]:
    """Vectorised ``P_a``; ``x_prime`` has trailing size ``n - 1`` (scalars allowed for ``n = 2``)."""
    rho2 = np.asarray(x_n, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2
    if np.any(rho2 == 0.0):
        raise ValueError("P_a is singular on the very thin space (x_n, y) = (0, 0)")
    xp = np.asarray(x_prime, dtype=float)
    if spec.n == 1:
        sq = np.zeros_like(rho2)
    elif spec.n == 2 and (xp.ndim == 0 or xp.shape[-1] != 1):
        sq = xp**2
    else:
        sq = np.sum(xp**2, axis=-1)
    return np.asarray(spec.normalization * rho2 ** (-spec.a / 2.0) / (sq + rho2) ** ((spec.n - 1 - spec.a) / 2.0))


@dataclass(slots=True)
class LineFunction:
    """A compactly supported function on the very thin line, sampled on a uniform grid.

    ``exact`` (when given) is used for point values; the cubic spline of the samples always supplies
    derivatives.
    """

    x: NDArray[np.float64]
    values: NDArray[np.float64]
    exact: LineCallable | None = None
    label: str = ""
    _spline: CubicSpline | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.ndim != 1 or self.x.shape != self.values.shape or self.x.size < 8:
            raise ValueError("line samples need matching 1-D arrays with at least 8 points")
        if (np.diff(self.x) <= 0).any():
            raise ValueError("line sample abscissae must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("line samples must be finite")

    @classmethod
    def from_callable(
        cls, fn: LineCallable, lo: float, hi: float, count: int = 801, *, label: str = "", keep_exact: bool = True
    ) -> LineFunction:
        x = np.linspace(lo, hi, count)
        return cls(x=x, values=np.asarray(fn(x), dtype=float), exact=fn if keep_exact else None, label=label)

    @classmethod
    def bump(cls, center: float = 0.0, width: float = 0.5, height: float = 1.0, count: int = 801) -> LineFunction:
        """``height * exp(1 - 1/(1 - s^2))`` for ``|s| < 1`` with ``s = (x - center)/width``."""

        def fn(x: NDArray[np.float64]) -> NDArray[np.float64]:
            s = (np.asarray(x, dtype=float) - center) / width
            inside = np.abs(s) < 1.0
            out = np.zeros_like(s)
            out[inside] = height * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
            return out

        return cls.from_callable(fn, center - width, center + width, count, label=f"bump({center:g},{width:g})")

    @property
    def support(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    def spline(self) -> CubicSpline:
        if self._spline is None:
            self._spline = CubicSpline(self.x, self.values)
        return self._spline

    def __call__(self, t: NDArray[np.float64]) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        inside = (t >= lo) & (t <= hi)
        out = np.zeros_like(t)
        if self.exact is not None:
            out[inside] = np.asarray(self.exact(t[inside]), dtype=float)
        else:
            out[inside] = self.spline()(t[inside])
        return out

    def derivative(self, t: NDArray[np.float64]) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        inside = (t >= lo) & (t <= hi)
        out = np.zeros_like(t)
        out[inside] = self.spline()(t[inside], 1)
        return out

    def decays(self) -> bool:
        scale = max(float(np.abs(self.values).max()), 1e-300)
        return bool(max(abs(self.values[0]), abs(self.values[-1])) <= DECAY_TOL * scale)

    def scaled(self, factor: float) -> LineFunction:
        exact = self.exact
        scaled_exact = None if exact is None else (lambda t: factor * np.asarray(exact(t)))
        return LineFunction(
            x=self.x.copy(), values=factor * self.values, exact=scaled_exact, label=f"{factor:g}*{self.label}"
        )

    def to_csv(self, path: Path) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["x", "value"])
        writer.writerows([f"{xi:.17g}", f"{vi:.17g}"] for xi, vi in zip(self.x, self.values))
        atomic_write_text(path, buffer.getvalue())
        return path

    @classmethod
    def from_csv(cls, path: Path) -> LineFunction:
        with Path(path).open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            rows = [(float(row["x"]), float(row["value"])) for row in reader]
        if not rows:
            raise ValueError(f"{path}: no samples")
        x, values = zip(*rows)
        return cls(x=np.array(x), values=np.array(values), label=Path(path).stem)


def _panels(center: float, rho: float, lo: float, hi: float, uniform: int) -> NDArray[np.float64]:
    """Uniform breakpoints over the support refined geometrically towards ``center`` down to ``rho``."""
    points = [np.linspace(lo, hi, uniform + 1)]
    if lo < center < hi:
        floor = max(rho, 1e-14 * max(abs(lo), abs(hi), 1.0))
        steps = floor * 2.0 ** np.arange(0, 64)
        steps = steps[steps < hi - lo]
        points += [center - steps, center + steps, np.array([center])]
    merged = np.concatenate(points)
    merged = merged[(merged >= lo) & (merged <= hi)]
    return np.unique(merged)


@dataclass(slots=True)
class ExtensionField:
    """``v *_{x'} P_a``: the a-harmonic extension of a line function off the very thin space (n = 2).

    Evaluated as ``C rho^{-a} int v(t) ((x_1 - t)^2 + rho^2)^{(a-1)/2} dt`` with ``rho^2 = x_2^2 + y^2`` by
    Gauss-Legendre on panels refined towards ``t = x_1``. On ``rho = 0`` the trace ``v(x_1)`` is returned.
    """

    spec: KernelSpec
    line: LineFunction
    order: int = 12
    uniform_panels: int = 64

    @property
    def n(self) -> int:
        return self.spec.n

    def _integrate(self, x1: float, rho: float, integrand: LineCallable) -> float:
        lo, hi = self.line.support
        breaks = _panels(x1, rho, lo, hi, self.uniform_panels)
        nodes, weights = leggauss(self.order)
        left, right = breaks[:-1], breaks[1:]
        half = (right - left)[:, None] / 2.0
        t = (left[:, None] + right[:, None]) / 2.0 + half * nodes[None, :]
        kernel = ((x1 - t) ** 2 + rho * rho) ** ((self.spec.a - 1.0) / 2.0)
        return float(np.sum(half * weights[None, :] * kernel * integrand(t)))

    def radial(self, x1: NDArray[np.float64], rho: NDArray[np.float64]) -> tuple[NDArray[np.float64], ...]:
        """Values, ``d/dx_1`` and ``d/drho`` at ``(x_1, rho)`` pairs."""
        a = self.spec.a
        c = self.spec.normalization
        value = np.empty(x1.size)
        d_x1 = np.empty(x1.size)
        d_rho = np.empty(x1.size)
        for i, (xi, ri) in enumerate(zip(x1, rho)):
            if ri == 0.0:
                value[i] = float(self.line(np.array([xi]))[0])
                d_x1[i] = float(self.line.derivative(np.array([xi]))[0])
                d_rho[i] = np.nan
                continue
            value[i] = c * ri ** (-a) * self._integrate(xi, ri, self.line)
            d_x1[i] = c * ri ** (-a) * self._integrate(xi, ri, self.line.derivative)
            d_rho[i] = c * ri ** (-1.0 - a) * self._integrate(
                xi, ri, lambda t, xi=xi: (t - xi) * self.line.derivative(t)
            )
        return value, d_x1, d_rho

    def values(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rho = np.hypot(pts[:, 1], pts[:, 2])
        return self.radial(pts[:, 0], rho)[0]

    def gradients(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rho = np.hypot(pts[:, 1], pts[:, 2])
        _, d_x1, d_rho = self.radial(pts[:, 0], rho)
        out = np.zeros_like(pts)
        out[:, 0] = d_x1
        safe = np.where(rho > 0.0, rho, 1.0)
        out[:, 1] = np.where(rho > 0.0, d_rho * pts[:, 1] / safe, 0.0)
        out[:, 2] = np.where(rho > 0.0, d_rho * pts[:, 2] / safe, 0.0)
        return out

    def refined(self, factor: int = 4) -> ExtensionField:
        return ExtensionField(
            spec=self.spec, line=self.line, order=self.order * factor, uniform_panels=self.uniform_panels * factor
        )


def extend(spec: KernelSpec, line: LineFunction, *, order: int = 12) -> ExtensionField:
    if spec.n != 2:
        raise ValueError(f"extension is implemented for a one-dimensional very thin space (n = 2), got n={spec.n}")
    if not line.decays():
        raise ValueError("line function does not decay at the ends of its support; extend the sample range")
    return ExtensionField(spec=spec, line=line, order=order)


def extend_on_grid(spec: KernelSpec, line: LineFunction, grid: Grid, *, order: int = 12) -> ScalarField:
    if grid.n != spec.n or not np.isclose(grid.a, spec.a):
        raise ValueError("grid and kernel disagree on n or a")
    ext = extend(spec, line, order=order)
    return sample_on_grid(grid, ext.values, label=f"ext({line.label})")
