from __future__ import annotations

import json
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator

CONTRACTS = Path(__file__).resolve().parents[2] / "contracts"
OUTPUTS = ["field", "kkt", "profile", "blowup", "scan", "kernel", "barrier", "equivalence", "manifest"]


@pytest.mark.parametrize("name", OUTPUTS)
def test_contract_is_a_valid_schema(name: str) -> None:
    schema = json.loads((CONTRACTS / f"{name}.schema.json").read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(schema)
    assert schema["$id"] == f"https://example.com/schemas/{name}.schema.json"
    assert schema["title"] == name


def test_every_contract_is_an_output() -> None:
    names = sorted(path.name.removesuffix(".schema.json") for path in CONTRACTS.glob("*.schema.json"))
    assert names == sorted(OUTPUTS)


def test_scan_contract_accepts_an_empty_table() -> None:
    schema = json.loads((CONTRACTS / "scan.schema.json").read_text(encoding="utf-8"))
    empty = {"n": 1, "a": 0.0, "spacing": 0.05, "counts": {}, "entries": []}
    errors = list(Draft202012Validator(schema).iter_errors(empty))
    assert errors == []
