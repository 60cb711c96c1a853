"""Run configuration: a dataclass loaded from a flat ``key = value`` file."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..scheme import DEFAULT_BUDGET


@dataclass
class RunConfig:
    prime: int = 11
    precision: int = 21
    margin: int = 3
    branch: str = "small"
    seed: int = 0
    data_dir: str = "data"
    cache_dir: str = ".fppkit-cache"
    report: str = ""
    budget: int = DEFAULT_BUDGET
    pool_strategy: str = "full"
    slice_dim: int = 7
    slice_count: int = 4
    workers: int = 1
    # search and lifting
    min_support: int = 3
    lift_points: int = 2
    max_lift_points: int = 8
    # nullspace stages
    row_slack: int = 25
    holdout: int = 20
    image_points: int = 600
    fixture_points: int = 100
    fnbhd_order: int = 2
    five_h_budget: int = 4 * 3600

    def validate(self) -> RunConfig:
        if self.prime < 3:
            raise ValueError("prime must be odd")
        if not self.precision > self.margin >= 1:
            raise ValueError("need precision > margin >= 1")
        if self.branch not in ("small", "large"):
            raise ValueError("branch must be 'small' or 'large'")
        if self.pool_strategy not in ("full", "slice"):
            raise ValueError("pool_strategy must be 'full' or 'slice'")
        for name in ("min_support", "lift_points", "max_lift_points", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def updated(self, **kw) -> RunConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        return dataclasses.replace(self, **kw).validate()

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key, val = key.strip().replace("-", "_"), val.strip()
            if not sep or key not in types:
                raise ValueError(f"config line {lineno}: cannot parse {raw!r}")
            values[key] = int(float(val)) if types[key] == "int" else val
        return cls(**values).validate()

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        return cls.from_text(Path(path).read_text())
