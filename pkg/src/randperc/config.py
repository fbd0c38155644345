"""Experiment configuration: JSON round-trip and a platform-stable hash."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from randperc.distributions import ConfigError


@dataclass
class ExperimentConfig:
    experiment: str = "dist-stats"
    distributions: list = field(default_factory=list)
    pdl_models: list = field(default_factory=list)
    lattice: dict = field(default_factory=lambda: {"kind": "square", "L": 64, "double_bonds": False,
                                                   "boundary_mode": "open"})
    source: Optional[dict] = None
    family: Optional[dict] = None
    mode: str = "rcep"
    disorder: str = "annealed"
    trials: int = 1000
    seed: int = 0
    samples: int = 1_000_000
    workers: int = 1
    grid: Optional[dict] = None
    threshold: bool = False
    compare_shapes: bool = False
    reproduce_table1: bool = False
    reproduce_fig1: bool = False
    out: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**data)
        if not isinstance(cfg.trials, int) or cfg.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if not isinstance(cfg.seed, int) or cfg.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if cfg.mode not in ("rcep", "rqep"):
            raise ConfigError("mode must be rcep or rqep")
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON, ignoring the output directory."""
        d = self.to_dict()
        d.pop("out", None)
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
        return hashlib.sha256(canon.encode("ascii")).hexdigest()
