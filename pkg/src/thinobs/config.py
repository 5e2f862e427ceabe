"""Run configuration: YAML blocks parsed into dataclasses, canonical dump and hash."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import structlog
import yaml

from .poly.extension import ext_a
from .poly.multipoly import MultiPoly
from .solver.fields import CONSTRAINT_SETS, ObstacleSpec
from .solver.grid import GridSpec
from .solver.psor import DEFAULT_MAX_SWEEPS, DEFAULT_OMEGA
from .util.fs import atomic_write_text, sha256_bytes

logger = structlog.get_logger(__name__)

KERNEL_CHECKS = ("symbol", "homogeneity", "flux")


def _as_int(value: Any, default: int) -> int:
    if value is None:
        return default
    try:
        return int(value)
    except (TypeError, ValueError):
        return default


def _as_float(value: Any, default: float) -> float:
    if value is None:
        return default
    try:
        return float(value)
    except (TypeError, ValueError):
        return default


def _as_optional_float(value: Any) -> float | None:
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def _as_floats(value: Any) -> list[float]:
    if value is None:
        return []
    if isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    return [float(v) for v in value]


def _as_points(value: Any) -> list[list[float]]:
    if value is None:
        return []
    return [_as_floats(point) for point in value]


def _block(raw: Mapping[str, Any], name: str) -> Mapping[str, Any]:
    block = raw.get(name) or {}
    if not isinstance(block, Mapping):
        raise ValueError(f"config block {name!r} must be a mapping, got {type(block).__name__}")
    return block


@dataclass(slots=True)
class ProblemConfig:
    n: int = 1
    a: float = 0.0
    res: int = 65
    half_width: float = 1.0
    constraint_set: str = "thin"
    boundary: str = "x1^2"
    obstacle: str = "0"
    extend: bool = True

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> ProblemConfig:
        config = cls(
            n=_as_int(raw.get("n"), 1),
            a=_as_float(raw.get("a"), 0.0),
            res=_as_int(raw.get("res"), 65),
            half_width=_as_float(raw.get("half_width"), 1.0),
            constraint_set=str(raw.get("constraint_set") or "thin"),
            boundary=str(raw.get("boundary") or "x1^2"),
            obstacle=str(raw.get("obstacle") or "0"),
            extend=bool(raw.get("extend", True)),
        )
        config.validate()
        return config

    def validate(self) -> None:
        self.grid_spec().validate()
        if self.constraint_set not in CONSTRAINT_SETS:
            raise ValueError(f"constraint_set must be one of {CONSTRAINT_SETS}, got {self.constraint_set!r}")
        if self.constraint_set == "very_thin" and self.a >= 0:
            raise ValueError(
                f"very_thin constraint requires a < 0 (the line has zero a-harmonic capacity for a={self.a})"
            )
        if self.constraint_set == "very_thin" and self.n < 2:  # noqa: PLR2004
            raise ValueError("very_thin constraint needs n >= 2")
        self.boundary_poly()
        self.obstacle_poly()

    def grid_spec(self) -> GridSpec:
        return GridSpec(n=self.n, res=self.res, a=self.a, half_width=self.half_width)

    def boundary_poly(self) -> MultiPoly:
        """Boundary data as a polynomial; ``extend`` replaces it by its a-harmonic even extension."""
        poly = MultiPoly.from_text(self.boundary, self.n)
        return ext_a(poly.restrict_thin(), self.a) if self.extend else poly

    def obstacle_poly(self) -> MultiPoly:
        return MultiPoly.from_text(self.obstacle, self.n)

    def obstacle_spec(self) -> ObstacleSpec:
        return ObstacleSpec(self.constraint_set, boundary=self.boundary_poly(), obstacle=self.obstacle_poly())

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "a": self.a,
            "res": self.res,
            "half_width": self.half_width,
            "constraint_set": self.constraint_set,
            "boundary": self.boundary,
            "obstacle": self.obstacle,
            "extend": self.extend,
        }


@dataclass(slots=True)
class SolverConfig:
    tol: float | None = None
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    omega: float = DEFAULT_OMEGA
    log_every: int = 1000

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> SolverConfig:
        omega = _as_float(raw.get("omega"), DEFAULT_OMEGA)
        if not 0.0 < omega < 2.0:  # noqa: PLR2004
            raise ValueError(f"omega must lie in (0, 2), got {omega}")
        return cls(
            tol=_as_optional_float(raw.get("tol")),
            max_sweeps=_as_int(raw.get("max_sweeps"), DEFAULT_MAX_SWEEPS),
            omega=omega,
            log_every=_as_int(raw.get("log_every"), 1000),
        )

    def to_dict(self) -> dict[str, Any]:
        return {"tol": self.tol, "max_sweeps": self.max_sweeps, "omega": self.omega, "log_every": self.log_every}


@dataclass(slots=True)
class DiagnosticsConfig:
    centers: list[list[float]] = field(default_factory=list)
    radii: list[float] = field(default_factory=list)
    lambdas: list[float] = field(default_factory=list)
    order: int = 16

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> DiagnosticsConfig:
        return cls(
            centers=_as_points(raw.get("centers")),
            radii=_as_floats(raw.get("radii")),
            lambdas=_as_floats(raw.get("lambdas")),
            order=_as_int(raw.get("order"), 16),
        )

    def to_dict(self) -> dict[str, Any]:
        return {"centers": self.centers, "radii": self.radii, "lambdas": self.lambdas, "order": self.order}


@dataclass(slots=True)
class BlowupConfig:
    centers: list[list[float]] = field(default_factory=list)
    rho: float | None = None

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> BlowupConfig:
        return cls(centers=_as_points(raw.get("centers")), rho=_as_optional_float(raw.get("rho")))

    def to_dict(self) -> dict[str, Any]:
        return {"centers": self.centers, "rho": self.rho}


@dataclass(slots=True)
class ScanConfig:
    spacing: float = 0.1
    extent: float | None = None
    tol: float = 1e-8

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> ScanConfig:
        spacing = _as_float(raw.get("spacing"), 0.1)
        if spacing <= 0:
            raise ValueError(f"scan spacing must be positive, got {spacing}")
        return cls(spacing=spacing, extent=_as_optional_float(raw.get("extent")), tol=_as_float(raw.get("tol"), 1e-8))

    def to_dict(self) -> dict[str, Any]:
        return {"spacing": self.spacing, "extent": self.extent, "tol": self.tol}


@dataclass(slots=True)
class VeryThinConfig:
    a: float = -0.5
    n: int = 2
    check: str = "symbol"
    bump_widths: list[float] = field(default_factory=lambda: [0.5, 0.7, 0.9])
    betas: list[float] = field(default_factory=lambda: [1.0])
    obstacle_width: float = 0.6
    obstacle_height: float = 1.0
    res: int = 33
    nodes: int = 201

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> VeryThinConfig:
        config = cls(
            a=_as_float(raw.get("a"), -0.5),
            n=_as_int(raw.get("n"), 2),
            check=str(raw.get("check") or "symbol"),
            bump_widths=_as_floats(raw.get("bump_widths")) or [0.5, 0.7, 0.9],
            betas=_as_floats(raw.get("betas")) or [1.0],
            obstacle_width=_as_float(raw.get("obstacle_width"), 0.6),
            obstacle_height=_as_float(raw.get("obstacle_height"), 1.0),
            res=_as_int(raw.get("res"), 33),
            nodes=_as_int(raw.get("nodes"), 201),
        )
        if config.check not in KERNEL_CHECKS:
            raise ValueError(f"kernel check must be one of {KERNEL_CHECKS}, got {config.check!r}")
        if not -1.0 < config.a < 0.0:
            raise ValueError(f"Unsupported weight exponent a={config.a}; the very thin toolkit needs a in (-1, 0)")
        return config

    def to_dict(self) -> dict[str, Any]:
        return {
            "a": self.a,
            "n": self.n,
            "check": self.check,
            "bump_widths": self.bump_widths,
            "betas": self.betas,
            "obstacle_width": self.obstacle_width,
            "obstacle_height": self.obstacle_height,
            "res": self.res,
            "nodes": self.nodes,
        }


@dataclass(slots=True)
class OutputConfig:
    directory: str | None = None
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> OutputConfig:
        formats = raw.get("formats") or ["csv", "json"]
        return cls(directory=raw.get("directory"), formats=[str(f) for f in formats])

    def to_dict(self) -> dict[str, Any]:
        return {"directory": self.directory, "formats": self.formats}


@dataclass(slots=True)
class RunConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    blowup: BlowupConfig = field(default_factory=BlowupConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    very_thin: VeryThinConfig = field(default_factory=VeryThinConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int | None = None

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> RunConfig:
        return cls(
            problem=ProblemConfig.from_dict(_block(raw, "problem")),
            solver=SolverConfig.from_dict(_block(raw, "solver")),
            diagnostics=DiagnosticsConfig.from_dict(_block(raw, "diagnostics")),
            blowup=BlowupConfig.from_dict(_block(raw, "blowup")),
            scan=ScanConfig.from_dict(_block(raw, "scan")),
            very_thin=VeryThinConfig.from_dict(_block(raw, "very_thin")),
            output=OutputConfig.from_dict(_block(raw, "output")),
            seed=None if raw.get("seed") is None else _as_int(raw.get("seed"), 0),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem": self.problem.to_dict(),
            "solver": self.solver.to_dict(),
            "diagnostics": self.diagnostics.to_dict(),
            "blowup": self.blowup.to_dict(),
            "scan": self.scan.to_dict(),
            "very_thin": self.very_thin.to_dict(),
            "output": self.output.to_dict(),
            "seed": self.seed,
        }

    def to_yaml(self) -> str:
        return str(yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=None))

    def config_hash(self) -> str:
        return sha256_bytes(self.to_yaml().encode("utf-8"))


def parse_config(text: str) -> RunConfig:
    data = yaml.safe_load(text) if text.strip() else {}
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ValueError(f"Expected mapping in config but found {type(data).__name__}")
    return RunConfig.from_dict(data)


def load_config(path: Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    config = parse_config(path.read_text(encoding="utf-8"))
    logger.info("config.loaded", path=str(path), config_hash=config.config_hash())
    return config


def dump_config(config: RunConfig, path: Path) -> Path:
    atomic_write_text(path, config.to_yaml())
    return path
