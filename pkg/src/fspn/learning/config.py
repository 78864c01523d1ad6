"""Hyper-parameters of structure learning and their flat ``key=value`` text form."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class LearnConfig:
    tau_low: float = 0.3
    tau_high: float = 0.7
    min_instances: int = 100
    sum_k: int = 2
    rdc_features: int = 20
    rdc_scale: float = 1.0 / 6.0
    rdc_seeds: int = 5
    rdc_max_rows: int = 0
    smoothing_alpha: float = 0.1
    gmm_components: int = 2
    split_method: str = "greedy"
    greedy_candidates: int = 10
    max_depth: int = 30
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.tau_low < self.tau_high:
            raise ValueError("need 0 <= tau_low < tau_high")
        if self.tau_high > 1.0 and not math.isinf(self.tau_high):
            raise ValueError("tau_high must be <= 1 or inf (factorize disabled)")
        if self.sum_k < 2:
            raise ValueError("sum_k must be >= 2")
        for name in ("min_instances", "rdc_features", "rdc_seeds", "gmm_components", "greedy_candidates",
                     "max_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.rdc_max_rows < 0:
            raise ValueError("rdc_max_rows must be >= 0 (0 = use every row)")
        if self.smoothing_alpha < 0 or self.rdc_scale <= 0:
            raise ValueError("smoothing_alpha must be >= 0 and rdc_scale > 0")
        if self.split_method not in ("greedy", "grid_kmeans"):
            raise ValueError(f"unknown split_method {self.split_method!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, float) and math.isinf(v):
                d[k] = "inf"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LearnConfig":
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for k, v in d.items():
            if k not in types:
                raise ValueError(f"unknown config key {k!r}")
            t = types[k]
            if t == "int":
                kw[k] = int(v)
            elif t == "float":
                kw[k] = float(v)
            else:
                kw[k] = str(v)
        return cls(**kw)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.to_dict().items())

    @classmethod
    def from_text(cls, text: str) -> "LearnConfig":
        d = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key=value")
            k, v = line.split("=", 1)
            d[k.strip()] = v.strip()
        return cls.from_dict(d)

    def replace(self, **kw) -> "LearnConfig":
        d = asdict(self)
        d.update(kw)
        return LearnConfig(**d)
