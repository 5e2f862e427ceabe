"""Singular-set scan: free boundary sampling, blow-up classification and the stratum table.

A sample is kept when it sits on the discrete free boundary and the contact set has small density around it
(singular points have zero-density contact). Each kept point is classified by its first and second blow-ups.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy.ndimage import binary_erosion
from scipy.stats import qmc

from ..poly.membership import thin_sphere_samples
from ..poly.multipoly import MultiPoly
from ..solver.fields import FieldLike, as_field, as_scalar_field
from ..util.fs import atomic_write_text
from .blowup import first_blowup, nxt_membership, second_blowup

logger = structlog.get_logger(__name__)

ThinObstacle = Callable[[NDArray[np.float64]], NDArray[np.float64]]

DENSITY_THRESHOLD = 0.4
CONTACT_TOL = 1e-8
ANALYTIC_RADII = np.geomspace(0.005, 0.04, 6)
ISOLATION_FACTOR = 10.0

CSV_COLUMNS = ["point", "kappa", "m", "lambda_star", "stratum", "tag", "anomalous", "nxt", "confident"]


@dataclass(slots=True)
class StratumEntry:
    point: tuple[float, ...]
    kappa: int | None
    m: int | None
    lambda_star: float | None
    tag: str
    nxt: bool = False
    confident: bool = True
    density: tuple[float, float] = (0.0, 0.0)
    notice: str | None = None

    @property
    def stratum(self) -> str:
        """``Sigma_kappa^m`` label, or ``other`` when the first blow-up failed."""
        if self.kappa is None or self.m is None:
            return "other"
        return f"Sigma_{self.kappa}^{self.m}"

    @property
    def anomalous(self) -> bool:
        return self.tag == "anomalous"

    def row(self) -> list[str]:
        return [
            " ".join(f"{c:.6g}" for c in self.point),
            "" if self.kappa is None else str(self.kappa),
            "" if self.m is None else str(self.m),
            "" if self.lambda_star is None else f"{self.lambda_star:.6g}",
            self.stratum,
            self.tag,
            str(self.anomalous).lower(),
            str(self.nxt).lower(),
            str(self.confident).lower(),
        ]

    def to_payload(self) -> dict[str, Any]:
        return {
            "point": list(self.point),
            "kappa": self.kappa,
            "m": self.m,
            "lambda_star": self.lambda_star,
            "stratum": self.stratum,
            "tag": self.tag,
            "anomalous": self.anomalous,
            "nxt": self.nxt,
            "confident": self.confident,
            "density": list(self.density),
            "notice": self.notice,
        }


@dataclass(slots=True)
class StratumTable:
    n: int
    a: float
    spacing: float
    entries: list[StratumEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def counts(self) -> dict[str, int]:
        return dict(sorted(Counter(entry.stratum for entry in self.entries).items()))

    def select(self, kappa: int | None = None, m: int | None = None) -> list[StratumEntry]:
        return [
            e for e in self.entries if (kappa is None or e.kappa == kappa) and (m is None or e.m == m)
        ]

    def find(self, point: Sequence[float], tol: float | None = None) -> StratumEntry | None:
        target = np.asarray(point, dtype=float)[: self.n]
        limit = 0.5 * self.spacing if tol is None else tol
        best, best_dist = None, math.inf
        for entry in self.entries:
            dist = float(np.linalg.norm(np.asarray(entry.point) - target))
            if dist < best_dist:
                best, best_dist = entry, dist
        return best if best_dist <= limit else None

    def to_payload(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "a": self.a,
            "spacing": self.spacing,
            "counts": self.counts(),
            "entries": [entry.to_payload() for entry in self.entries],
        }

    def to_csv(self, path: Path) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(entry.row() for entry in self.entries)
        atomic_write_text(path, buffer.getvalue())
        return path

    def to_json(self, path: Path) -> Path:
        atomic_write_text(path, json.dumps(self.to_payload(), indent=2, sort_keys=True))
        return path


def _lattice(n: int, extent: float, spacing: float) -> tuple[NDArray[np.float64], list[NDArray[np.float64]]]:
    """Symmetric lattice through the origin; returns points and per-axis coordinates."""
    half = int(math.floor(extent / spacing + 1e-9))
    axis = spacing * np.arange(-half, half + 1, dtype=float)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1), [axis] * n


def _thin(points: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.hstack([points, np.zeros((points.shape[0], 1))])


class _ContactOracle:
    """Contact test ``u - phi <= tol * scale`` on thin-space points, for grid and analytic fields."""

    def __init__(self, source: FieldLike, obstacle: ThinObstacle | None, tol: float, scale: float) -> None:
        self.source = source
        self.obstacle = obstacle
        self.tol = tol
        self.scale = max(scale, 1e-300)

    def gap(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        values = self.source.values(_thin(points))
        if self.obstacle is not None:
            values = values - self.obstacle(points)
        return np.asarray(values)

    def contact(self, points: NDArray[np.float64]) -> NDArray[np.bool_]:
        return np.asarray(self.gap(points) <= self.tol * self.scale)

    def density(self, center: NDArray[np.float64], radius: float, step: float) -> float:
        offsets, _ = _lattice(center.size, radius, step)
        offsets = offsets[np.linalg.norm(offsets, axis=1) <= radius + 1e-12]
        return float(self.contact(center + offsets).mean())


def _classify(
    source: FieldLike,
    a: float,
    point: NDArray[np.float64],
    radii: NDArray[np.float64],
    density: tuple[float, float],
    seed: int = 0,
) -> StratumEntry:
    coords = tuple(float(c) for c in point)
    try:
        first = first_blowup(source, a, point, radii=radii, seed=seed)
    except ValueError as exc:
        logger.warning("singular_set.point_skipped", point=list(coords), error=str(exc))
        return StratumEntry(coords, None, None, None, "unclassified", confident=False, density=density, notice=str(exc))
    if not first.ok or first.kappa is None:
        return StratumEntry(
            coords, None, None, None, "unclassified", confident=False, density=density, notice=first.notice
        )
    report = second_blowup(source, a, first)
    flags = nxt_membership(report)
    confident = first.confident and (report.lambda_error is None or not report.lambda_error > 0.05)
    return StratumEntry(
        point=coords,
        kappa=first.kappa,
        m=report.m,
        lambda_star=report.lambda_star,
        tag=report.stratum,
        nxt=flags.member,
        confident=bool(confident),
        density=density,
        notice=report.notice or first.notice,
    )


def scan(
    source: FieldLike | MultiPoly,
    spacing: float,
    a: float,
    *,
    obstacle: ThinObstacle | None = None,
    extent: float | None = None,
    tol: float = CONTACT_TOL,
    threads: int = 1,
    seed: int = 0,
) -> StratumTable:
    """Sample the thin space on a lattice of step ``spacing``, keep zero-density free boundary points, classify them.

    ``extent`` bounds the lattice (default: half the grid width, or 0.5 for analytic fields). ``seed`` is passed
    to the sampled membership check of every candidate.
    """
    if spacing <= 0.0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    fieldlike = as_field(source)
    n = fieldlike.n
    grid_field = as_scalar_field(fieldlike)
    if grid_field is None:
        region = 0.5 if extent is None else extent
        radii: NDArray[np.float64] = ANALYTIC_RADII
        step = spacing / 4.0
    else:
        width = grid_field.grid.spec.half_width
        region = 0.5 * width if extent is None else extent
        h = grid_field.grid.h
        if spacing < h:
            raise ValueError(f"spacing {spacing} is finer than the grid step {h}")
        # grid scans sample nodes only
        spacing = max(1, round(spacing / h)) * h
        reach = width - region
        if reach < 12.0 * h:
            raise ValueError(f"scan extent {region} leaves no room for blow-up balls inside half-width {width}")
        radii = np.geomspace(6.0 * h, min(0.5 * reach, 0.3 * width), 6)
        step = h

    points, axes = _lattice(n, region, spacing)
    magnitude = float(np.abs(fieldlike.values(_thin(points))).max(initial=0.0))
    oracle = _ContactOracle(fieldlike, obstacle, tol, magnitude)
    contact = oracle.contact(points).reshape([axis.size for axis in axes])
    interior = binary_erosion(contact, border_value=1)
    boundary = (contact & ~interior).ravel()

    candidates: list[tuple[NDArray[np.float64], tuple[float, float]]] = []
    for point in points[boundary]:
        outer = oracle.density(point, 4.0 * spacing, step)
        inner = oracle.density(point, 2.0 * spacing, step)
        if inner < DENSITY_THRESHOLD:
            candidates.append((point, (inner, outer)))
    logger.info(
        "singular_set.candidates",
        samples=int(points.shape[0]),
        contact=int(contact.sum()),
        free_boundary=int(boundary.sum()),
        singular=len(candidates),
    )

    def work(item: tuple[NDArray[np.float64], tuple[float, float]]) -> StratumEntry:
        return _classify(fieldlike, a, item[0], radii, item[1], seed)

    if threads > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(work, candidates))
    else:
        entries = [work(item) for item in candidates]
    entries.sort(key=lambda entry: entry.point)
    table = StratumTable(n=n, a=float(a), spacing=float(spacing), entries=entries)
    logger.info("singular_set.scan", entries=len(table), counts=table.counts())
    return table


@dataclass(slots=True)
class NondegeneracyVerdict:
    satisfied: bool
    sup_laplacian: float
    c: float
    exact: bool

    @property
    def margin(self) -> float:
        """Largest ``c`` for which the condition holds on the sampled ball."""
        return -self.sup_laplacian

    def to_payload(self) -> dict[str, Any]:
        return {
            "satisfied": self.satisfied,
            "sup_laplacian": self.sup_laplacian,
            "c": self.c,
            "margin": self.margin,
            "exact": self.exact,
        }


def _ball_samples(n: int, samples: int, seed: int) -> NDArray[np.float64]:
    if n == 1:
        return np.linspace(-1.0, 1.0, 2 * samples + 1)[:, None]
    engine = qmc.Sobol(d=n, scramble=True, seed=seed)
    cube = 2.0 * engine.random_base2(max(int(math.ceil(math.log2(max(samples, 2)))), 1)) - 1.0
    inside = cube[np.linalg.norm(cube, axis=1) <= 1.0]
    return np.vstack([np.zeros((1, n)), inside, thin_sphere_samples(n, samples, seed)])


def nondegeneracy_check(phi: MultiPoly, c: float, *, samples: int = 4096, seed: int = 0) -> NondegeneracyVerdict:
    """``sup_{B_1'} Delta_x phi <= -c``; exact for quadratic obstacles, sampled otherwise."""
    laplacian = phi.restrict_thin().as_float().laplacian_x()
    if laplacian.degree() <= 0:
        sup = float(laplacian.coefficient([0] * (phi.n + 1)))
        exact = True
    else:
        points = _ball_samples(phi.n, samples, seed)
        sup = float(laplacian.values(_thin(points)).max())
        exact = False
    verdict = NondegeneracyVerdict(satisfied=bool(sup <= -c), sup_laplacian=sup, c=float(c), exact=exact)
    logger.info("singular_set.nondegeneracy", **verdict.to_payload())
    return verdict


@dataclass(slots=True)
class IsolationVerdict:
    point: tuple[float, ...]
    kappa: int
    isolated: bool
    radius: float
    conflicts: list[tuple[float, ...]] = field(default_factory=list)
    lower_order_nearby: int = 0

    def to_payload(self) -> dict[str, Any]:
        return {
            "point": list(self.point),
            "kappa": self.kappa,
            "isolated": self.isolated,
            "radius": self.radius,
            "conflicts": [list(p) for p in self.conflicts],
            "lower_order_nearby": self.lower_order_nearby,
        }


def isolation_check(table: StratumTable, point: Sequence[float]) -> IsolationVerdict:
    """No other entry of order ``>= kappa`` within ``10 * spacing`` of an ``m = 0`` point."""
    entry = table.find(point)
    if entry is None:
        raise ValueError(f"no table entry at {list(point)}")
    if entry.m != 0 or entry.kappa is None:
        raise ValueError(f"isolation needs an m = 0 entry, got stratum {entry.stratum}")
    radius = ISOLATION_FACTOR * table.spacing
    here = np.asarray(entry.point)
    conflicts: list[tuple[float, ...]] = []
    lower = 0
    for other in table.entries:
        if other is entry or other.kappa is None:
            continue
        if float(np.linalg.norm(np.asarray(other.point) - here)) > radius:
            continue
        if other.kappa >= entry.kappa:
            conflicts.append(other.point)
        else:
            lower += 1
    verdict = IsolationVerdict(
        point=entry.point,
        kappa=entry.kappa,
        isolated=not conflicts,
        radius=radius,
        conflicts=conflicts,
        lower_order_nearby=lower,
    )
    logger.info("singular_set.isolation", **verdict.to_payload())
    return verdict


def stratum_flatness(table: StratumTable, kappa: int, m: int) -> float:
    """Largest distance from the entries of ``Sigma_kappa^m`` to their best-fit m-dimensional affine plane."""
    cloud = np.array([e.point for e in table.select(kappa, m)], dtype=float)
    if cloud.shape[0] <= m + 1:
        return 0.0
    centered = cloud - cloud.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    normal_part = centered - centered @ vt[:m].T @ vt[:m] if m else centered
    return float(np.linalg.norm(normal_part, axis=1).max())
