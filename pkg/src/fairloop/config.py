"""Service configuration: key=value file with environment overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

ENV_PREFIX = "FAIRLOOP_"


@dataclass(frozen=True)
class ServiceConfig:
    port: int = 8000
    t1_seconds: float = 5.0
    theta: float = 0.8
    data_dir: Path = Path("data")
    admin_token: str = "admin"
    sweep_tick: float = 0.05

    def __post_init__(self) -> None:
        if self.t1_seconds <= 0:
            raise ValueError("t1_seconds must be positive")
        if not 0 < self.theta <= 1:
            raise ValueError("theta must be in (0, 1]")
        object.__setattr__(self, "data_dir", Path(self.data_dir))


def _parse_kv(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_config(
    path: str | Path | None = None, env: Mapping[str, str] | None = None
) -> ServiceConfig:
    """Build a ServiceConfig from the file (if any), then apply env overrides."""
    env = os.environ if env is None else env
    values: dict[str, str] = {}
    if path is not None:
        values.update(_parse_kv(Path(path).read_text(encoding="utf-8")))
    for key in ("port", "t1_seconds", "theta", "data_dir", "admin_token", "sweep_tick"):
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = env[env_key]
    cfg = ServiceConfig()
    if "port" in values:
        cfg = replace(cfg, port=int(values["port"]))
    if "t1_seconds" in values:
        cfg = replace(cfg, t1_seconds=float(values["t1_seconds"]))
    if "theta" in values:
        cfg = replace(cfg, theta=float(values["theta"]))
    if "data_dir" in values:
        cfg = replace(cfg, data_dir=Path(values["data_dir"]))
    if "admin_token" in values:
        cfg = replace(cfg, admin_token=values["admin_token"])
    if "sweep_tick" in values:
        cfg = replace(cfg, sweep_tick=float(values["sweep_tick"]))
    return cfg
