from __future__ import annotations

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class LabSettings(BaseSettings):
    """Environment defaults; CLI flags win over these, these win over config defaults."""

    model_config = SettingsConfigDict(env_prefix="THINOBS_", extra="ignore")

    out_root: Path = Path("runs")
    log_level: int = Field(default=20, ge=0, le=50)
    threads: int = Field(default=1, ge=1)
    seed: int = 0


def get_settings() -> LabSettings:
    return LabSettings()
