"""Frequency diagnostics on spheres centred at thin-space points.

With ``B_r`` centred at ``x0`` on the thin space:

    H(r) = r^{-(n+a)} int_{dB_r} u^2 |y|^a        D(r) = r^{-(n+a-1)} int_{B_r} |grad u|^2 |y|^a
    N(r) = D / H        H_lam(r) = H / r^{2 lam}        W_lam(r) = r^{-2 lam} (D - lam H)

so a lam-homogeneous a-harmonic field has constant ``N = lam`` and ``W_lam = 0``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import structlog
from numpy.typing import NDArray

from ..poly.multipoly import MultiPoly
from ..poly.quadrature import ball_rule, sphere_rule
from ..solver.fields import FieldLike, ScalarField, as_field, as_scalar_field
from ..util.fs import atomic_write_text

logger = structlog.get_logger(__name__)

H_FLOOR = 1e-300
MONOTONE_TOL = 1e-3
MIN_FREQUENCY_RADII = 4


@dataclass(slots=True)
class FrequencyProfile:
    center: list[float]
    radii: NDArray[np.float64]
    H: NDArray[np.float64]
    D: NDArray[np.float64]
    N: NDArray[np.float64]
    lambdas: list[float] = field(default_factory=list)
    weiss: dict[float, NDArray[np.float64]] = field(default_factory=dict)
    h_lambda: dict[float, NDArray[np.float64]] = field(default_factory=dict)
    monotone: dict[str, bool] = field(default_factory=dict)
    notice: str | None = None

    def __len__(self) -> int:
        return int(self.radii.size)

    def columns(self) -> list[str]:
        names = ["r", "H", "D", "N"]
        for lam in self.lambdas:
            names += [f"H_{lam:g}", f"W_{lam:g}"]
        return names

    def rows(self) -> list[list[float]]:
        out = []
        for i, r in enumerate(self.radii):
            row = [float(r), float(self.H[i]), float(self.D[i]), float(self.N[i])]
            for lam in self.lambdas:
                row += [float(self.h_lambda[lam][i]), float(self.weiss[lam][i])]
            out.append(row)
        return out

    def to_payload(self) -> dict[str, Any]:
        return {
            "center": self.center,
            "columns": self.columns(),
            "rows": self.rows(),
            "lambdas": list(self.lambdas),
            "monotone": dict(self.monotone),
            "notice": self.notice,
        }

    def to_csv(self, path: Path) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns())
        writer.writerows(self.rows())
        atomic_write_text(path, buffer.getvalue())
        return path

    def to_json(self, path: Path) -> Path:
        atomic_write_text(path, json.dumps(self.to_payload(), indent=2, sort_keys=True))
        return path

    def to_gnuplot(self, path: Path) -> Path:
        lines = ["# " + " ".join(self.columns())]
        lines += [" ".join(f"{value:.17g}" for value in row) for row in self.rows()]
        atomic_write_text(path, "\n".join(lines) + "\n")
        return path


@dataclass(slots=True)
class FrequencyEstimate:
    value: float
    slope: float
    fit_residual: float
    window: int
    confident: bool

    def to_event(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "slope": self.slope,
            "fit_residual": self.fit_residual,
            "window": self.window,
            "confident": self.confident,
        }


@dataclass(slots=True)
class WeissVerdict:
    kappa: float
    nonnegative: bool
    monotone: bool
    identically_zero: bool
    min_value: float
    frequency_at_zero: float | None
    notice: str | None = None

    def to_payload(self) -> dict[str, Any]:
        return {
            "kappa": self.kappa,
            "nonnegative": self.nonnegative,
            "monotone": self.monotone,
            "identically_zero": self.identically_zero,
            "min_value": self.min_value,
            "frequency_at_zero": self.frequency_at_zero,
            "notice": self.notice,
        }


def default_radii(source: FieldLike, count: int = 12) -> NDArray[np.float64]:
    """Geometric radii ``0.04 * 1.25^k`` kept inside 80% of the domain; grid fields start at ``6h``."""
    grid_field = as_scalar_field(source)
    radii = 0.04 * 1.25 ** np.arange(count)
    if grid_field is None:
        return radii[radii <= 0.8]
    width = grid_field.grid.spec.half_width
    radii = radii[(radii >= 6.0 * grid_field.grid.h) & (radii <= 0.8 * width)]
    if radii.size < 4:
        radii = np.geomspace(6.0 * grid_field.grid.h, 0.8 * width, 6)
    return radii


def _center_vector(n: int, center: Sequence[float] | None) -> NDArray[np.float64]:
    vec = np.zeros(n)
    if center is not None:
        given = np.asarray(center, dtype=float)
        if given.size not in (n, n + 1):
            raise ValueError(f"center must have {n} thin coordinates, got {given.size}")
        if given.size == n + 1 and given[n] != 0.0:
            raise ValueError("center must lie on the thin space (y = 0)")
        vec[:] = given[:n]
    return vec


def sphere_H(
    source: FieldLike, center: NDArray[np.float64], radii: NDArray[np.float64], a: float, order: int
) -> NDArray[np.float64]:
    rule = sphere_rule(source.n, a, order)
    out = np.empty(radii.size)
    for i, r in enumerate(radii):
        values = source.values(rule.nodes_at(center, float(r)))
        out[i] = rule.integrate(values**2)
    return out


def _ball_D(
    source: FieldLike, center: NDArray[np.float64], radii: NDArray[np.float64], a: float, order: int
) -> NDArray[np.float64]:
    rule = ball_rule(source.n, a, order, order)
    out = np.empty(radii.size)
    for i, r in enumerate(radii):
        grads = source.gradients(rule.nodes_at(center, float(r)))
        out[i] = float(r) ** 2 * rule.integrate(np.sum(grads**2, axis=1))
    return out


def _ramp(distance: NDArray[np.float64], radius: float, h: float) -> NDArray[np.float64]:
    return np.asarray(np.clip((radius - distance) / h + 0.5, 0.0, 1.0))


def _grid_D(values: ScalarField, center: NDArray[np.float64], radii: NDArray[np.float64]) -> NDArray[np.float64]:
    """Edge energies of the discrete Dirichlet form, weighted by a smooth partial-volume indicator."""
    grid = values.grid
    n, h = grid.n, grid.h
    u = values.values_array
    coords = np.meshgrid(*grid.node_coords, indexing="ij")
    squared_x = sum((coords[i] - center[i]) ** 2 for i in range(n))
    edges: list[tuple[NDArray[np.float64], NDArray[np.float64]]] = []
    for axis in range(n):
        energy = h ** (n - 2) * grid.dual_weights_y * np.diff(u, axis=axis) ** 2
        lo = [slice(None)] * (n + 1)
        lo[axis] = slice(0, -1)
        shifted = coords[axis][tuple(lo)] + h / 2.0 - center[axis]
        dist2 = squared_x[tuple(lo)] - (coords[axis][tuple(lo)] - center[axis]) ** 2 + shifted**2
        edges.append((np.sqrt(dist2 + coords[n][tuple(lo)] ** 2), energy))
    lo = [slice(None)] * n + [slice(0, -1)]
    energy_y = h**n * grid.conductance_y * np.diff(u, axis=n) ** 2
    y_mid = coords[n][tuple(lo)] + h / 2.0
    edges.append((np.sqrt(squared_x[tuple(lo)] + y_mid**2), energy_y))

    out = np.empty(radii.size)
    for i, r in enumerate(radii):
        total = sum(float(np.sum(_ramp(dist, float(r), h) * energy)) for dist, energy in edges)
        out[i] = 2.0 * total / float(r) ** (n + grid.a - 1.0)
    return out


def _is_monotone(values: NDArray[np.float64], tol: float) -> bool:
    if values.size < 2:
        return True
    scale = max(float(np.abs(values).max()), 1e-300)
    return bool((np.diff(values) >= -tol * scale).all())


def profile(
    source: FieldLike | MultiPoly,
    a: float,
    center: Sequence[float] | None = None,
    radii: Sequence[float] | NDArray[np.float64] | None = None,
    lambdas: Sequence[float] = (),
    *,
    order: int = 16,
    tol: float = MONOTONE_TOL,
) -> FrequencyProfile:
    """H, D, N and the lam-families on an increasing list of radii."""
    fieldlike = as_field(source)
    n = fieldlike.n
    x0 = _center_vector(n, center)
    r = default_radii(fieldlike) if radii is None else np.asarray(radii, dtype=float)
    if r.size == 0 or (r <= 0).any():
        raise ValueError("radii must be positive and non-empty")
    if (np.diff(r) <= 0).any():
        raise ValueError("radii must be strictly increasing")

    grid_field = as_scalar_field(fieldlike)
    if grid_field is not None:
        width = grid_field.grid.spec.half_width
        if float(np.abs(x0).max(initial=0.0)) + float(r[-1]) > width:
            raise ValueError(f"largest ball B_{r[-1]:g}({x0.tolist()}) leaves the domain [-{width:g}, {width:g}]")
        if not np.isclose(grid_field.grid.a, a):
            raise ValueError(f"weight mismatch: field grid has a={grid_field.grid.a}, profile asked for a={a}")
        D = _grid_D(grid_field, x0, r)
        H = sphere_H(grid_field, x0, r, a, order)
    else:
        D = _ball_D(fieldlike, x0, r, a, order)
        H = sphere_H(fieldlike, x0, r, a, order)

    notice = None
    keep = H > H_FLOOR
    if not keep.all():
        notice = f"H(r) below {H_FLOOR:g} at {int((~keep).sum())} radii; profile truncated"
        logger.warning("diagnostics.truncated", dropped=int((~keep).sum()))
        r, H, D = r[keep], H[keep], D[keep]
    N = D / H if r.size else np.empty(0)

    result = FrequencyProfile(
        center=x0.tolist(), radii=r, H=H, D=D, N=N, lambdas=[float(x) for x in lambdas], notice=notice
    )
    result.monotone["H"] = _is_monotone(H, tol)
    result.monotone["N"] = _is_monotone(N, tol)
    for lam in result.lambdas:
        result.h_lambda[lam] = H / r ** (2.0 * lam)
        result.weiss[lam] = (D - lam * H) / r ** (2.0 * lam)
        result.monotone[f"H_{lam:g}"] = _is_monotone(result.h_lambda[lam], tol)
        result.monotone[f"W_{lam:g}"] = _is_monotone(result.weiss[lam], tol)
    logger.info(
        "diagnostics.profile",
        n=n,
        a=a,
        radii=int(r.size),
        n_min=float(N.min()) if N.size else None,
        n_max=float(N.max()) if N.size else None,
        monotone=result.monotone,
    )
    return result


def frequency_at_zero(result: FrequencyProfile, window: int = 5, fit_tol: float = 1e-2) -> FrequencyEstimate:
    """Linear fit of N against r^2 over the smallest radii, read off at r = 0."""
    if len(result) < MIN_FREQUENCY_RADII:
        raise ValueError(
            f"need at least {MIN_FREQUENCY_RADII} radii to extrapolate the frequency, got {len(result)}"
        )
    count = min(window, len(result))
    r2 = result.radii[:count] ** 2
    values = result.N[:count]
    slope, intercept = np.polyfit(r2, values, 1)
    fit = float(np.abs(values - (slope * r2 + intercept)).max())
    confident = result.monotone.get("N", True) or fit <= fit_tol
    estimate = FrequencyEstimate(
        value=float(intercept), slope=float(slope), fit_residual=fit, window=count, confident=bool(confident)
    )
    logger.debug("diagnostics.frequency_at_zero", **estimate.to_event())
    return estimate


def weiss_nonneg_check(
    source: FieldLike | MultiPoly,
    kappa: float,
    a: float,
    center: Sequence[float] | None = None,
    radii: Sequence[float] | NDArray[np.float64] | None = None,
    *,
    tol: float = MONOTONE_TOL,
) -> WeissVerdict:
    """``W_kappa >= 0`` and non-decreasing, plus ``W_kappa == 0`` for kappa-homogeneous polynomials."""
    result = profile(source, a, center, radii, [kappa], tol=tol)
    weiss = result.weiss[kappa]
    scale = max(float(result.h_lambda[kappa].max(initial=0.0)), 1e-300)
    estimate = frequency_at_zero(result) if len(result) >= MIN_FREQUENCY_RADII else None
    notice = result.notice
    if estimate is not None and estimate.value < kappa - 1e-2:
        notice = f"N(0+)={estimate.value:.4g} < kappa={kappa:g}: Weiss monotonicity does not apply"
    identically_zero = bool(np.abs(weiss).max(initial=0.0) <= 1e-10 * scale)
    homogeneous = isinstance(source, MultiPoly) and float(kappa).is_integer() and source.is_homogeneous(int(kappa))
    if homogeneous and not identically_zero:
        notice = "kappa-homogeneous polynomial with nonzero W_kappa"
    verdict = WeissVerdict(
        kappa=float(kappa),
        nonnegative=bool((weiss >= -tol * scale).all()),
        monotone=result.monotone[f"W_{kappa:g}"],
        identically_zero=identically_zero,
        min_value=float(weiss.min(initial=np.inf)) if weiss.size else 0.0,
        frequency_at_zero=None if estimate is None else estimate.value,
        notice=notice,
    )
    logger.info("diagnostics.weiss", **verdict.to_payload())
    return verdict
