from __future__ import annotations

from pathlib import Path

import pytest


@pytest.fixture(autouse=True)
def isolated_out_root(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Default run directories land under tmp_path instead of ./runs."""
    root = tmp_path / "runs"
    monkeypatch.setenv("THINOBS_OUT_ROOT", str(root))
    return root
