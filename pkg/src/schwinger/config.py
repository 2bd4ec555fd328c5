"""Flat key = value experiment files.

One file format serves both the simulation parameters (HmcConfig) and the
optional sweep/tuning extras. Unknown keys are rejected with the offending
line; missing keys fall back to defaults with a logged notice.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, fields, replace

from .integrators import SCHEME_IDS

log = logging.getLogger("schwinger")


@dataclass(frozen=True)
class HmcConfig:
    """Simulation parameters; bare defaults mirror the benchmark setup
    (32x32 lattice, beta 1.0, m0 -0.231367, trajectories of length 2.0,
    200 momentum samples)."""

    L: int = 32
    T: int = 32
    beta: float = 1.0
    m0: float = -0.231367
    tau: float = 2.0
    h: float = 0.05
    scheme: str = "leapfrog"
    micro_per_call: int | None = None
    micro_ratio: float = 10.0
    cg_tol: float = 1e-12
    seed: int = 20160905
    n_thermalize: int = 500
    n_samples: int = 200
    quenched: bool = False      # drop the pseudofermion field entirely

    def __post_init__(self):
        if self.scheme not in SCHEME_IDS:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.L < 2 or self.T < 2:
            raise ValueError("lattice extents must be at least 2")


def desk_scale(config: HmcConfig) -> HmcConfig:
    """CI-sized variant: 8x8 lattice, 50 samples, shorter thermalization."""
    return replace(config, L=8, T=8, n_samples=50, n_thermalize=200)


@dataclass(frozen=True)
class SweepPlan:
    """What a sweep or tuning run iterates over."""

    schemes: tuple[str, ...] = SCHEME_IDS
    h_grid: tuple[float, ...] = (0.05, 0.1, 0.2)
    gauge_config: str | None = None
    target: float = 0.9
    h_min: float = 0.01
    h_max: float = 0.4

    def __post_init__(self):
        for s in self.schemes:
            if s not in SCHEME_IDS:
                raise ValueError(f"unknown scheme {s!r} in plan")
        if any(b <= a for a, b in zip(self.h_grid, self.h_grid[1:])):
            raise ValueError("h_grid must be strictly increasing")
        if not self.h_grid:
            raise ValueError("empty h_grid")


_CONFIG_TYPES = {f.name: f.type for f in fields(HmcConfig)}
_PLAN_KEYS = {"schemes", "h_grid", "gauge_config", "target", "h_min", "h_max"}


def _parse_scalar(key: str, raw: str, lineno: int):
    raw = raw.strip()
    try:
        if key in ("L", "T", "seed", "n_thermalize", "n_samples"):
            return int(raw)
        if key == "micro_per_call":
            return None if raw.lower() == "none" else int(raw)
        if key == "quenched":
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            return raw.lower() == "true"
        if key == "scheme" or key == "gauge_config":
            return raw
        if key == "schemes":
            return tuple(s.strip() for s in raw.split(",") if s.strip())
        if key == "h_grid":
            return tuple(float(s) for s in raw.split(",") if s.strip())
        return float(raw)
    except ValueError as exc:
        raise ValueError(f"line {lineno}: malformed value for {key!r}: {raw!r}") from exc


def parse_experiment_file(text: str) -> tuple[HmcConfig, SweepPlan]:
    """Parse the flat format into (HmcConfig, SweepPlan)."""
    known = set(_CONFIG_TYPES) | _PLAN_KEYS
    cfg_kw: dict = {}
    plan_kw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        value = _parse_scalar(key, raw, lineno)
        (plan_kw if key in _PLAN_KEYS else cfg_kw)[key] = value
    for name in _CONFIG_TYPES:
        if name not in cfg_kw:
            log.info("config key %s not set, using default", name)
    return HmcConfig(**cfg_kw), SweepPlan(**plan_kw)


def format_config(config: HmcConfig) -> str:
    """Emit every HmcConfig field; parse(format(c)) round-trips."""
    lines = []
    for f in fields(HmcConfig):
        value = getattr(config, f.name)
        if value is None:
            value = "none"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
