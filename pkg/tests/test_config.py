from __future__ import annotations

from pathlib import Path

import pytest

from src.thinobs.config import RunConfig, dump_config, load_config, parse_config
from src.thinobs.poly import MultiPoly, is_a_harmonic

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_quartic_config_blocks() -> None:
    config = load_config(CONFIGS / "quartic.yaml")
    assert config.problem.n == 2  # noqa: PLR2004
    assert config.problem.boundary == "x1^2 x2^2"
    assert config.scan.extent == pytest.approx(0.3)
    assert config.diagnostics.centers == [[0.0, 0.0], [0.3, 0.0]]
    assert config.diagnostics.lambdas == [2.0, 4.0]
    assert config.very_thin.check == "symbol"


def test_empty_text_gives_defaults() -> None:
    assert parse_config("").to_dict() == RunConfig().to_dict()
    assert load_config(None).config_hash() == RunConfig().config_hash()


def test_boundary_is_extended_a_harmonically() -> None:
    config = parse_config("problem: {n: 1, a: -0.4, boundary: 'x1^2 - 0.5'}")
    assert is_a_harmonic(config.problem.boundary_poly(), -0.4)
    raw = parse_config("problem: {n: 1, boundary: 'x1^2 + y^2', extend: false}")
    assert raw.problem.boundary_poly().to_text() == MultiPoly.from_text("x1^2 + y^2", 1).to_text()


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("problem: {n: 2, a: 0.2, constraint_set: very_thin}", "requires a < 0"),
        ("problem: {n: 1, a: -0.5, constraint_set: very_thin}", "n >= 2"),
        ("problem: {constraint_set: surface}", "constraint_set must be one of"),
        ("problem: {n: 4}", "thin dimension"),
        ("solver: {omega: 2.5}", "omega"),
        ("scan: {spacing: -0.1}", "spacing"),
        ("very_thin: {check: bogus}", "kernel check"),
        ("very_thin: {a: 0.5}", "Unsupported weight exponent"),
        ("problem: 3", "must be a mapping"),
        ("- 1\n- 2\n", "Expected mapping"),
    ],
)
def test_invalid_configs(text: str, message: str) -> None:
    with pytest.raises(ValueError, match=message):
        parse_config(text)


def test_hash_ignores_key_order_and_formatting() -> None:
    first = parse_config("problem: {n: 2, a: 0.0}\nseed: 3\n")
    second = parse_config("seed: 3\nproblem:\n  a: 0\n  n: 2\n")
    assert first.config_hash() == second.config_hash()
    assert first.config_hash() != parse_config("seed: 4").config_hash()


def test_dump_and_reload(tmp_path: Path) -> None:
    config = load_config(CONFIGS / "verythin.yaml")
    path = dump_config(config, tmp_path / "resolved.yaml")
    assert load_config(path).config_hash() == config.config_hash()
    assert config.problem.constraint_set == "very_thin"
    assert config.very_thin.betas == [0.25, 1.0]


def test_explicit_zero_seed_is_kept_apart_from_missing_seed() -> None:
    assert parse_config("seed: 0").seed == 0
    assert parse_config("problem: {n: 2}").seed is None
    assert parse_config("seed: 0").config_hash() != parse_config("").config_hash()
