"""Run artifacts: field dumps with JSON sidecars, schema-validated JSON outputs and the run manifest."""

from __future__ import annotations

import datetime
import json
import math
import platform
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterator

import numpy as np
import scipy
import structlog
from jsonschema import Draft202012Validator

from . import __version__
from .solver.fields import ObstacleSpec, ScalarField
from .solver.grid import GridSpec, build_grid
from .util.fs import atomic_write_bytes, atomic_write_text, sha256_bytes, sha256_file

logger = structlog.get_logger(__name__)

CONTRACTS_DIR = Path(__file__).resolve().parents[2] / "contracts"
FIELD_ORDER = "x1..xn,y"


@lru_cache(maxsize=32)
def _validator(name: str) -> Draft202012Validator:
    path = CONTRACTS_DIR / f"{name}.schema.json"
    if not path.exists():
        raise ValueError(f"unknown contract {name!r}: {path} does not exist")
    schema = json.loads(path.read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def validate_payload(name: str, payload: dict[str, Any]) -> None:
    """Raise ``ValueError`` listing every schema violation of ``payload`` against ``contracts/<name>``."""
    errors = sorted(_validator(name).iter_errors(payload), key=lambda e: list(e.path))
    if errors:
        details = "; ".join(f"{'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}" for e in errors)
        raise ValueError(f"{name} payload violates its contract: {details}")


def finite(value: Any) -> Any:
    """Replace NaN and infinities by ``None`` and numpy scalars by Python ones, recursively."""
    if isinstance(value, dict):
        return {str(k): finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [finite(v) for v in value]
    if isinstance(value, np.ndarray):
        return finite(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def _dumps(payload: dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path, name: str, payload: dict[str, Any]) -> Path:
    clean = finite(payload)
    validate_payload(name, clean)
    atomic_write_text(path, _dumps(clean))
    return path


def write_field(
    directory: Path,
    values: ScalarField,
    *,
    spec: ObstacleSpec | None = None,
    residuals: dict[str, Any] | None = None,
) -> tuple[Path, Path]:
    """``field.bin`` (little-endian f64, C order over ``x1..xn, y``) and its ``field.json`` sidecar."""
    payload = values.to_bytes()
    grid = values.grid
    bin_path = atomic_write_bytes(directory / "field.bin", payload)
    sidecar = {
        "n": grid.n,
        "res": grid.spec.res,
        "a": grid.a,
        "order": FIELD_ORDER,
        "shape": list(grid.shape),
        "sha256": sha256_bytes(payload),
        "grid": grid.to_descriptor(),
        "obstacle_hash": spec.digest() if spec is not None else None,
        "residuals": residuals or {},
    }
    json_path = write_json(directory / "field.json", "field", sidecar)
    logger.info("artifacts.field_written", path=str(bin_path), sha256=sidecar["sha256"], shape=sidecar["shape"])
    return bin_path, json_path


def read_field(path: Path) -> ScalarField:
    """Load ``field.bin`` through its sidecar; the sidecar is ``field.json`` next to it."""
    bin_path = path if path.suffix == ".bin" else path.with_suffix(".bin")
    sidecar_path = bin_path.with_suffix(".json")
    if not bin_path.exists() or not sidecar_path.exists():
        raise ValueError(f"field dump {bin_path} needs both the .bin file and its .json sidecar")
    sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
    validate_payload("field", sidecar)
    if sidecar["order"] != FIELD_ORDER:
        raise ValueError(f"unsupported axis order {sidecar['order']!r}")
    payload = bin_path.read_bytes()
    digest = sha256_bytes(payload)
    if digest != sidecar["sha256"]:
        raise ValueError(f"field checksum mismatch: sidecar {sidecar['sha256']}, file {digest}")
    half_width = float(sidecar.get("grid", {}).get("spec", {}).get("half_width", 1.0))
    spec = GridSpec(n=int(sidecar["n"]), res=int(sidecar["res"]), a=float(sidecar["a"]), half_width=half_width)
    grid = build_grid(spec)
    values = np.frombuffer(payload, dtype="<f8").reshape(grid.shape).astype(float)
    logger.info("artifacts.field_read", path=str(bin_path), shape=list(grid.shape))
    return ScalarField(grid=grid, values_array=values, label=bin_path.stem)


@dataclass(slots=True)
class Manifest:
    """Per-command record: config hash, versions, phase timings and artifact checksums."""

    command: str
    config_hash: str
    timings: dict[str, float] = field(default_factory=dict)
    artifacts: list[dict[str, str]] = field(default_factory=list)

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - start, 6)

    def add(self, path: Path, root: Path) -> None:
        self.artifacts.append({"path": str(path.relative_to(root)), "sha256": sha256_file(path)})

    def to_payload(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "versions": {
                "thinobs": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "timings": dict(self.timings),
            "artifacts": sorted(self.artifacts, key=lambda item: item["path"]),
            "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }

    def write(self, directory: Path) -> Path:
        return write_json(directory / "manifest.json", "manifest", self.to_payload())
