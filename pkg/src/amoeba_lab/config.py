"""Run configuration shared by the pipeline and the command line."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace


@dataclass(frozen=True)
class Tolerances:
    curvature_rel: float = 0.01  # relative gap to the curvature bound counted as maximal
    near_miss: float = 3.0  # factor on each threshold that makes a miss inconclusive
    pinch: float = 1e-4
    pinch_angle: float = 0.1
    angle: float = 0.05  # tentacle direction vs side normal
    gluing: float = 1e-3
    residual: float = 1e-7
    imag: float = 1e-7
    cluster: float = 1e-6
    component_slack: float = 0.05  # slack on total <= 2 pi p + pi t

    def override(self, values: dict) -> "Tolerances":
        known = {f.name for f in fields(self)}
        bad = sorted(set(values) - known)
        if bad:
            raise ValueError(f"unknown tolerance(s): {', '.join(bad)}")
        return replace(self, **{k: float(v) for k, v in values.items()})


@dataclass(frozen=True)
class RunConfig:
    polynomial: str = ""
    window: float = 12.0
    grid_n: int = 32
    theta_samples: int = 64
    resolution: int = 256
    n_phi: int = 64
    raster_window: float = 6.0
    seed: int = 0
    output_dir: str | None = None
    threads: int | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        for name in ("window", "grid_n", "theta_samples", "resolution", "n_phi", "raster_window"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.threads is not None and self.threads < 1:
            raise ValueError("threads must be positive")

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("output_dir")
        d.pop("threads")
        return d

    @classmethod
    def from_file(cls, path: str) -> dict:
        """Raw mapping from a JSON config file (merged by the caller)."""
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        return data

    @classmethod
    def build(cls, *layers: dict) -> "RunConfig":
        """Merge mappings left to right; later layers win, ``None`` values are skipped."""
        merged: dict = {}
        tols: dict = {}
        for layer in layers:
            for k, v in layer.items():
                if v is None:
                    continue
                if k == "tolerances":
                    tols.update(v)
                else:
                    merged[k] = v
        known = {f.name for f in fields(cls)}
        bad = sorted(set(merged) - known)
        if bad:
            raise ValueError(f"unknown config key(s): {', '.join(bad)}")
        return cls(**merged, tolerances=Tolerances().override(tols))

    def pool_size(self) -> int:
        env = os.environ.get("AMOEBA_LAB_THREADS")
        if env:
            return max(1, int(env))
        if self.threads:
            return self.threads
        return os.cpu_count() or 1
