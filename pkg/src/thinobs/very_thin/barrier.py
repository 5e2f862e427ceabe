from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import structlog
from numpy.typing import NDArray

from ..poly.quadrature import unit_sphere_rule
from ..solver.fields import FieldLike
from .kernel import ExtensionField, KernelSpec, LineFunction, extend

logger = structlog.get_logger(__name__)

CUTOFF_INNER = 2.0
CUTOFF_OUTER = 3.0


def _transition(t: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.zeros_like(t)
    positive = t > 0.0
    out[positive] = np.exp(-1.0 / t[positive])
    return out


def cutoff(r: NDArray[np.float64]) -> NDArray[np.float64]:
    """Smooth non-increasing ``zeta``: 1 on ``[0, 2]``, 0 on ``[3, inf)``."""
    s = (np.abs(np.asarray(r, dtype=float)) - CUTOFF_INNER) / (CUTOFF_OUTER - CUTOFF_INNER)
    up = _transition(1.0 - s)
    down = _transition(s)
    return np.asarray(up / (up + down))


@dataclass(slots=True)
class BarrierReport:
    beta: float
    a: float
    trace_error: float
    boundary_min: float
    holder_exponent: float
    expected_exponent: float
    radii: list[float] = field(default_factory=list)
    oscillations: list[float] = field(default_factory=list)

    def to_payload(self) -> dict[str, Any]:
        return {
            "beta": self.beta,
            "a": self.a,
            "trace_error": self.trace_error,
            "boundary_min": self.boundary_min,
            "holder_exponent": self.holder_exponent,
            "expected_exponent": self.expected_exponent,
            "radii": self.radii,
            "oscillations": self.oscillations,
        }


@dataclass(slots=True)
class Barrier:
    field: ExtensionField
    report: BarrierReport


def barrier_profile(beta: float, count: int = 1201) -> LineFunction:
    """``h_beta(x') = |x'|^beta zeta(|x'|)`` sampled on ``[-3, 3]``."""

    def fn(x: NDArray[np.float64]) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        return np.asarray(np.abs(x) ** beta * cutoff(x))

    return LineFunction.from_callable(fn, -CUTOFF_OUTER, CUTOFF_OUTER, count, label=f"h_{beta:g}")


def _oscillation(ext: ExtensionField, radius: float, angles: int) -> float:
    phi = np.linspace(0.0, np.pi, angles)
    scales = np.array([0.25, 0.5, 1.0])
    pts = [np.zeros((1, 3))]
    for s in scales:
        ring = np.zeros((angles, 3))
        ring[:, 0] = s * radius * np.cos(phi)
        ring[:, 2] = s * radius * np.sin(phi)
        pts.append(ring)
    values = ext.values(np.vstack(pts))
    return float(values.max() - values.min())


def barrier(
    spec: KernelSpec,
    beta: float,
    *,
    levels: tuple[int, int] = (6, 12),
    angles: int = 9,
    order: int = 12,
) -> Barrier:
    """Extension of ``h_beta`` with its trace, positivity and dyadic Hoelder-exponent checks."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    ext = extend(spec, barrier_profile(beta), order=order)

    line = np.linspace(-1.0, 1.0, 201)
    on_line = np.zeros((line.size, 3))
    on_line[:, 0] = line
    trace_error = float(np.abs(ext.values(on_line) - np.abs(line) ** beta).max())

    sphere, _ = unit_sphere_rule(3, 8)
    upper = sphere[sphere[:, 2] >= 0.0]
    boundary_min = float(ext.values(upper).min())

    radii = 2.0 ** -np.arange(levels[0], levels[1] + 1, dtype=float)
    osc = np.array([_oscillation(ext, float(r), angles) for r in radii])
    slope, _ = np.polyfit(np.log(radii), np.log(osc), 1)

    report = BarrierReport(
        beta=float(beta),
        a=spec.a,
        trace_error=trace_error,
        boundary_min=boundary_min,
        holder_exponent=float(slope),
        expected_exponent=float(min(-spec.a, beta)),
        radii=radii.tolist(),
        oscillations=osc.tolist(),
    )
    logger.info("barrier.built", **{k: v for k, v in report.to_payload().items() if k not in ("radii", "oscillations")})
    return Barrier(field=ext, report=report)


@dataclass(slots=True)
class DominanceReport:
    center: list[float]
    constant: float
    max_ratio: float
    violations: int
    samples: int

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_payload(self) -> dict[str, Any]:
        return {
            "center": self.center,
            "constant": self.constant,
            "max_ratio": self.max_ratio,
            "violations": self.violations,
            "samples": self.samples,
            "holds": self.holds,
        }


def barrier_dominance(
    source: FieldLike,
    bar: Barrier,
    center: Sequence[float],
    *,
    radius: float = 0.25,
    shells: int = 4,
    slack: float = 1e-6,
) -> DominanceReport:
    """``|u(x0 + X)| <= C h_beta(X)`` inside ``B_radius``, with ``C`` calibrated on the sphere ``|X| = radius``.

    Samples sit on shells ``radius * 2^-k`` of the upper unit sphere rule; the line through ``x0`` is skipped.
    """
    if source.n != bar.field.n:
        raise ValueError(f"field has n={source.n}, barrier lives in n={bar.field.n}")
    sphere, _ = unit_sphere_rule(source.n + 1, 8)
    upper = sphere[(sphere[:, -1] >= 0.0) & (np.hypot(sphere[:, -2], sphere[:, -1]) > 1e-3)]
    shift = np.zeros(source.n + 1)
    shift[: len(center)] = np.asarray(center, dtype=float)[: source.n]

    def ratio(scale: float) -> NDArray[np.float64]:
        local = scale * upper
        barrier_values = bar.field.values(local)
        return np.asarray(np.abs(source.values(shift + local)) / np.maximum(barrier_values, 1e-300))

    constant = float(ratio(radius).max())
    inner = np.concatenate([ratio(radius * 2.0**-k) for k in range(1, shells + 1)])
    report = DominanceReport(
        center=shift[: source.n].tolist(),
        constant=constant,
        max_ratio=float(inner.max()),
        violations=int((inner > constant * (1.0 + slack)).sum()),
        samples=int(inner.size),
    )
    logger.info("barrier.dominance", **report.to_payload())
    return report
