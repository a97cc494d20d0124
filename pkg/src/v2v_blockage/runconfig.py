"""Run configuration: YAML loading, validation and the resolved-config echo."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import yaml

from .config import (
    BlockageAttenuationProfile,
    RadioConfig,
    ScenarioConfig,
    UNTABULATED_DEFAULTS,
    VehicleDims,
)
from .sim import ConfigurationError, LaneRule, hardcore_rate

EXPERIMENTS = ("blockage-prob", "avg-blockers", "snr-dist", "service-prob", "distance-pdf", "validate")
FORMATS = ("csv", "json")

DEFAULT_DISTANCES = tuple(float(d) for d in range(10, 201, 10))
DEFAULT_DENSITIES = (0.01, 0.05)
DEFAULT_THRESHOLDS = (0.0,)


class ConfigError(ValueError):
    """Bad config file or field; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    experiment: str = "blockage-prob"
    distances: tuple[float, ...] = DEFAULT_DISTANCES
    densities: tuple[float, ...] = DEFAULT_DENSITIES
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    lane_rule: LaneRule = LaneRule.RANDOM
    trials: int = 2000
    seed: int = 1
    workers: int = 1
    out: str | None = None
    format: str = "csv"
    defaults: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "lane_rule", LaneRule(self.lane_rule))
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"run.experiment: unknown experiment {self.experiment!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"run.format: expected one of {FORMATS}, got {self.format!r}")
        for name in ("distances", "densities", "thresholds"):
            grid = tuple(float(v) for v in getattr(self, name))
            object.__setattr__(self, name, grid)
            if not grid:
                raise ConfigError(f"run.{name}: grid is empty")
            if any(not math.isfinite(v) for v in grid):
                raise ConfigError(f"run.{name}: values must be finite")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError(f"run.{name}: grid must be strictly increasing")
        if any(d <= 0 for d in self.distances):
            raise ConfigError("run.distances: distances must be > 0")
        if any(r < 0 for r in self.densities):
            raise ConfigError("run.densities: densities must be >= 0")
        if self.trials < 0:
            raise ConfigError("run.trials: must be >= 0")
        if self.workers < 1:
            raise ConfigError("run.workers: must be >= 1")
        for rho in {self.scenario.rho, *self.densities}:
            try:
                hardcore_rate(self.scenario.with_(rho=rho))
            except ConfigurationError as exc:
                raise ConfigError(f"density {rho}: {exc}") from None

    def with_(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _build(cls, data: Any, path: str, defaults: set[str], nested: dict | None = None):
    """Instantiate a config dataclass from a mapping, rejecting unknown keys."""
    nested = nested or {}
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(map(str, unknown))}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        key = f"{path}.{f.name}"
        if f.name in nested:
            kwargs[f.name] = _build(nested[f.name], data.get(f.name), key, defaults)
        elif f.name in data:
            kwargs[f.name] = data[f.name]
        else:
            defaults.add(key)
    for name, value in kwargs.items():
        if isinstance(value, list):
            kwargs[name] = tuple(value)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


_RUN_KEYS = {
    "experiment", "distances", "densities", "thresholds", "lane_rule",
    "trials", "seed", "workers", "out", "format",
}


def parse_config(data: Any) -> RunConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    unknown = sorted(set(data) - {"scenario", "radio", "run"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {', '.join(map(str, unknown))}")
    defaults: set[str] = set()
    scenario = _build(ScenarioConfig, data.get("scenario"), "scenario", defaults, {"dims": VehicleDims})
    radio = _build(RadioConfig, data.get("radio"), "radio", defaults, {"profile": BlockageAttenuationProfile})
    run = data.get("run") or {}
    if not isinstance(run, dict):
        raise ConfigError("run: expected a mapping")
    bad = sorted(set(run) - _RUN_KEYS)
    if bad:
        raise ConfigError(f"run: unknown key(s) {', '.join(map(str, bad))}")
    for key in sorted(_RUN_KEYS - set(run)):
        defaults.add(f"run.{key}")
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in run.items()}
    try:
        return RunConfig(scenario=scenario, radio=radio, defaults=frozenset(defaults), **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"run: {exc}") from None


def load_config(path: str | Path | None) -> RunConfig:
    """Read a YAML run config; ``None`` yields the all-defaults config."""
    if path is None:
        return parse_config({})
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    return parse_config(data)


def _plain(value):
    if isinstance(value, Enum):
        return value.value
    if dataclasses.is_dataclass(value):
        return {f.name: _plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    return value


# execution settings that cannot change any emitted number stay out of the echo,
# so outputs compare byte for byte across worker counts and destinations
_NOT_ECHOED = {"workers", "out"}


def resolved(cfg: RunConfig) -> dict:
    """Fully resolved config as plain data (the echo written into outputs)."""
    run = {k: _plain(getattr(cfg, k)) for k in sorted(_RUN_KEYS - _NOT_ECHOED)}
    return {"scenario": _plain(cfg.scenario), "radio": _plain(cfg.radio), "run": run}


def echo_lines(cfg: RunConfig) -> list[str]:
    """``key = value`` lines, tagging values that came from defaults.

    Defaults for parameters missing from the reference parameter set are tagged
    ``default, untabulated``.
    """
    untabulated = {f"{a}.{b}" for a, b in UNTABULATED_DEFAULTS}
    lines = []

    def walk(prefix, node):
        if isinstance(node, dict):
            for k in node:
                walk(f"{prefix}.{k}" if prefix else k, node[k])
            return
        tag = ""
        if _is_default(prefix, cfg.defaults):
            tag = "  (default, untabulated)" if _is_default(prefix, untabulated) else "  (default)"
        lines.append(f"{prefix} = {yaml.safe_dump(node, default_flow_style=True, width=math.inf).strip().removesuffix('...').strip()}{tag}")

    walk("", resolved(cfg))
    return lines


def _is_default(key: str, defaults) -> bool:
    parts = key.split(".")
    return any(".".join(parts[:i]) in defaults for i in range(1, len(parts) + 1))
