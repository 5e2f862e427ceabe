from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from src.thinobs.artifacts import Manifest, finite, read_field, validate_payload, write_field, write_json
from src.thinobs.poly import MultiPoly, ext_a
from src.thinobs.solver import GridSpec, ObstacleSpec, ScalarField, build_grid, sample_on_grid

BOUNDARY = ext_a(MultiPoly.from_text("x1^2 - 0.5", 1), -0.3)


def _field() -> ScalarField:
    return sample_on_grid(build_grid(GridSpec(n=1, res=17, a=-0.3)), BOUNDARY)


def test_field_dump_round_trip(tmp_path: Path) -> None:
    field = _field()
    spec = ObstacleSpec("thin", boundary=BOUNDARY)
    bin_path, json_path = write_field(tmp_path, field, spec=spec, residuals={"sweeps": 3})
    assert bin_path.stat().st_size == 8 * field.values_array.size
    sidecar = json.loads(json_path.read_text(encoding="utf-8"))
    assert sidecar["order"] == "x1..xn,y"
    assert sidecar["shape"] == list(field.grid.shape)
    assert sidecar["obstacle_hash"] == spec.digest()

    loaded = read_field(bin_path)
    assert np.array_equal(loaded.values_array, field.values_array)
    assert loaded.grid.a == pytest.approx(-0.3)
    assert read_field(json_path).n == 1


def test_field_checksum_mismatch(tmp_path: Path) -> None:
    bin_path, _ = write_field(tmp_path, _field())
    payload = bytearray(bin_path.read_bytes())
    payload[0] ^= 0xFF
    bin_path.write_bytes(bytes(payload))
    with pytest.raises(ValueError, match="checksum mismatch"):
        read_field(bin_path)


def test_field_needs_sidecar(tmp_path: Path) -> None:
    bin_path, json_path = write_field(tmp_path, _field())
    json_path.unlink()
    with pytest.raises(ValueError, match="sidecar"):
        read_field(bin_path)


def test_finite_replaces_non_finite_numbers() -> None:
    cleaned = finite({"x": np.float64("nan"), "y": [1.0, math.inf], "z": np.arange(2), "ok": np.bool_(True)})
    assert cleaned == {"x": None, "y": [1.0, None], "z": [0, 1], "ok": True}
    assert isinstance(cleaned["z"][0], int)


def test_schema_violations_are_reported(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="barrier payload violates its contract"):
        write_json(tmp_path / "barrier.json", "barrier", {"a": -0.5})
    assert not (tmp_path / "barrier.json").exists()
    with pytest.raises(ValueError, match="unknown contract"):
        validate_payload("nope", {})


def test_manifest_records_phases_and_artifacts(tmp_path: Path) -> None:
    manifest = Manifest(command="kernel", config_hash="0" * 64)
    with manifest.phase("check"):
        pass
    artifact = tmp_path / "kernel.txt"
    artifact.write_text("x", encoding="utf-8")
    manifest.add(artifact, tmp_path)
    payload = json.loads(manifest.write(tmp_path).read_text(encoding="utf-8"))
    assert payload["command"] == "kernel"
    assert payload["timings"]["check"] >= 0.0
    assert payload["artifacts"] == [
        {"path": "kernel.txt", "sha256": "2d711642b726b04401627ca9fbac32f5c8530fb1903cc4db02258717921a4881"}
    ]
    assert set(payload["versions"]) == {"thinobs", "numpy", "scipy", "python"}
