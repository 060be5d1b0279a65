"""Scenario configuration: YAML documents validated into :class:`ScenarioConfig`.

Schema (all sections optional except ``scenario``)::

    scenario: scalar-riccati        # one of SCENARIOS
    seed: 0                         # integer >= 0
    profile:
      a: [0.5, 1.0, 1.5, 2.0, 3.0]  # decay rate(s), each in (0, 10]
      J: 1.0                        # curvature amplitude, >= 0
      modulation: 0.3               # tangential modulation, [0, 1)
      anisotropy: 0.5               # eigenvalue spread, [0, 1)
    grid:
      n: 2                          # tangential dimension, 1..6
      y_resolution: 16              # geodesics per patch, 1..256
      r_max: 35.0                   # (0, 700]
      step: 0.1                     # sample spacing, (0, 1]
    fit:
      window: [5.0, 35.0]           # fit interval inside [0, r_max]
    output:
      dir: null                     # default: $ALHLAB_OUT_DIR or ./alhlab-out
      prefix: null                  # default: the scenario name
    params: {}                      # scenario-specific extras
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigurationError

SCENARIOS = (
    "scalar-riccati", "comparison", "first-derivatives", "second-derivatives", "model-systems",
    "model-asymptotics", "compactify-holder", "einstein-identity", "weyl-decay",
)
OUT_ENV = "ALHLAB_OUT_DIR"
DEFAULT_OUT = "alhlab-out"

_SECTIONS = {"scenario", "seed", "profile", "grid", "fit", "output", "params"}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    a_values: tuple = (1.5,)
    J: float = 1.0
    modulation: float = 0.3
    anisotropy: float = 0.5
    n: int = 2
    y_resolution: int = 1
    r_max: float = 35.0
    step: float = 0.1
    window: tuple = (5.0, 35.0)
    out_dir: Optional[str] = None
    prefix: Optional[str] = None
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        validate(self)

    @property
    def output_dir(self) -> Path:
        return Path(self.out_dir or os.environ.get(OUT_ENV) or DEFAULT_OUT)

    @property
    def stem(self) -> str:
        return self.prefix or self.scenario

    def param(self, key, default=None):
        return self.params.get(key, default)

    def with_overrides(self, seed=None, r_max=None, out_dir=None) -> "ScenarioConfig":
        kw: dict[str, Any] = {}
        if seed is not None:
            kw["seed"] = int(seed)
        if out_dir is not None:
            kw["out_dir"] = str(out_dir)
        if r_max is not None:
            r_max = float(r_max)
            lo, hi = self.window
            kw["r_max"] = r_max
            kw["window"] = (min(lo, 0.5 * r_max), min(hi, r_max))
        return replace(self, **kw)

    def as_dict(self) -> dict:
        """Plain mapping for the summary document (output paths excluded)."""
        return {
            "scenario": self.scenario, "seed": self.seed,
            "profile": {"a": list(self.a_values), "J": self.J, "modulation": self.modulation,
                        "anisotropy": self.anisotropy},
            "grid": {"n": self.n, "y_resolution": self.y_resolution, "r_max": self.r_max,
                     "step": self.step},
            "fit": {"window": list(self.window)},
            "params": self.params,
        }


def _check(cond, msg):
    if not cond:
        raise ConfigurationError(msg)


def validate(cfg: ScenarioConfig) -> None:
    """Range checks for every documented field."""
    _check(cfg.scenario in SCENARIOS, f"unknown scenario {cfg.scenario!r}; expected one of {SCENARIOS}")
    _check(len(cfg.a_values) > 0, "profile.a must not be empty")
    for a in cfg.a_values:
        _check(isinstance(a, (int, float)) and 0 < a <= 10, f"profile.a={a!r} outside (0, 10]")
    _check(cfg.J >= 0, "profile.J must be >= 0")
    _check(0 <= cfg.modulation < 1, "profile.modulation must lie in [0, 1)")
    _check(0 <= cfg.anisotropy < 1, "profile.anisotropy must lie in [0, 1)")
    _check(isinstance(cfg.n, int) and 1 <= cfg.n <= 6, "grid.n must be an integer in 1..6")
    _check(isinstance(cfg.y_resolution, int) and 1 <= cfg.y_resolution <= 256,
           "grid.y_resolution must be an integer in 1..256")
    _check(0 < cfg.r_max <= 700, "grid.r_max must lie in (0, 700]")
    _check(0 < cfg.step <= 1, "grid.step must lie in (0, 1]")
    _check(len(cfg.window) == 2, "fit.window must have two entries")
    lo, hi = cfg.window
    _check(0 <= lo < hi <= cfg.r_max, f"fit.window {cfg.window} must satisfy 0 <= lo < hi <= r_max")
    _check(isinstance(cfg.seed, int) and cfg.seed >= 0, "seed must be a nonnegative integer")
    _check(isinstance(cfg.params, dict), "params must be a mapping")


def from_mapping(doc: dict) -> ScenarioConfig:
    """Build a config from a parsed document, rejecting unknown sections."""
    if not isinstance(doc, dict):
        raise ConfigurationError("config document must be a mapping")
    unknown = set(doc) - _SECTIONS
    if unknown:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
    if "scenario" not in doc:
        raise ConfigurationError("config must name a scenario")
    prof = doc.get("profile") or {}
    grid = doc.get("grid") or {}
    fit = doc.get("fit") or {}
    out = doc.get("output") or {}
    a = prof.get("a", 1.5)
    a_values = tuple(a) if isinstance(a, (list, tuple)) else (a,)
    try:
        return ScenarioConfig(
            scenario=str(doc["scenario"]),
            a_values=tuple(float(x) for x in a_values),
            J=float(prof.get("J", 1.0)),
            modulation=float(prof.get("modulation", 0.3)),
            anisotropy=float(prof.get("anisotropy", 0.5)),
            n=int(grid.get("n", 2)),
            y_resolution=int(grid.get("y_resolution", 1)),
            r_max=float(grid.get("r_max", 35.0)),
            step=float(grid.get("step", 0.1)),
            window=tuple(float(x) for x in fit.get("window", (5.0, 35.0))),
            out_dir=out.get("dir"),
            prefix=out.get("prefix"),
            seed=int(doc.get("seed", 0)),
            params=dict(doc.get("params") or {}),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed config value: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"invalid YAML in {path}: {exc}") from exc
    return from_mapping(doc)


def default_config(scenario: str) -> ScenarioConfig:
    """The packaged configuration for ``scenario``."""
    if scenario not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {scenario!r}")
    text = resources.files("alhlab").joinpath("configs", f"{scenario}.yaml").read_text(encoding="utf-8")
    return from_mapping(yaml.safe_load(text))
