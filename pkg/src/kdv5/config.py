"""Scenario configuration: key = value files with optional [section] headers.

Sections are organizational only; keys live in one flat namespace.  Values
may use `pi` literals for lengths (`L = 32pi`).  Unknown keys and missing
required keys are reported with line numbers.  The full resolved config is
echoed into every summary.json.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields

from .errors import ConfigError

__all__ = ["ScenarioConfig", "parse_config", "SCENARIOS"]

SCENARIOS = (
    "conservation",
    "persistence",
    "decay_regularity",
    "lipschitz",
    "smoothing_probe",
)

_PI_RE = re.compile(r"^\s*(-?[0-9.eE+-]*?)\s*\*?\s*pi\s*$")


def _parse_float(text: str) -> float:
    m = _PI_RE.match(text)
    if m:
        factor = m.group(1)
        if factor in ("", "+"):
            factor = "1"
        elif factor == "-":
            factor = "-1"
        return float(factor) * math.pi
    return float(text)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "on", "yes", "1"):
        return True
    if lowered in ("false", "off", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(_parse_float(p) for p in text.split(","))


@dataclass
class ScenarioConfig:
    """Resolved parameters for one scenario run."""

    scenario: str
    # grid
    L: float = 32.0 * math.pi
    n: int | None = None  # default depends on k: 1024 (k=1), 2048 (k=2)
    # data family
    family: str = "gaussian"
    amplitude: float = 0.5
    width: float = 8.0
    center: float = 0.0
    scale: float = 0.5  # sech2 steepness
    band: float = 2.0  # random-schwartz bandwidth
    # evolution
    k: int = 1
    T: float = 1.0
    dt: float | None = None  # default T/2048
    nt: int = 128  # fixed-point solver time nodes
    scheme: str = "etdrk4"
    nonlinear: bool = True
    store_points: int = 128
    tol: float = 1e-10
    # diagnostics
    r: float = 0.5
    alpha: float = 0.125
    N: int | None = None  # plateau width; default floor(0.8 L / 3)
    rho: float = 1.0
    # scenario specific
    eps: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    draws: int = 100
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; expected one of {', '.join(SCENARIOS)}"
            )
        if self.k not in (1, 2):
            raise ConfigError(f"k must be 1 or 2, got {self.k}")
        if self.family not in ("gaussian", "sech2", "random-schwartz"):
            raise ConfigError(f"unknown data family {self.family!r}")
        if self.scheme not in ("etdrk4", "picard"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.scenario == "decay_regularity":
            if self.k != 2:
                raise ConfigError("decay_regularity requires k = 2")
            if not 0.0 < self.alpha <= 0.125:
                raise ConfigError(f"alpha must lie in (0, 1/8], got {self.alpha}")
        if self.T <= 0:
            raise ConfigError(f"T must be positive, got {self.T}")

    @property
    def resolved_n(self) -> int:
        if self.n is not None:
            return self.n
        return 2048 if self.k == 2 else 1024

    @property
    def resolved_dt(self) -> float:
        return self.dt if self.dt is not None else self.T / 2048.0

    def resolved(self) -> dict:
        """Full config with defaults applied, for the summary echo."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        out["n"] = self.resolved_n
        out["dt"] = self.resolved_dt
        return out


_SCHEMA = {
    "scenario": str,
    "scenarios": "strlist",  # sweep only
    "L": _parse_float,
    "n": int,
    "family": str,
    "amplitude": _parse_float,
    "width": _parse_float,
    "center": _parse_float,
    "scale": _parse_float,
    "band": _parse_float,
    "k": int,
    "T": _parse_float,
    "dt": _parse_float,
    "nt": int,
    "scheme": str,
    "nonlinear": _parse_bool,
    "store_points": int,
    "tol": _parse_float,
    "r": _parse_float,
    "alpha": _parse_float,
    "N": int,
    "rho": _parse_float,
    "eps": _parse_float_list,
    "draws": int,
    "seed": int,
    "out": str,
}


def parse_config_text(text: str) -> dict:
    """Parse key = value lines into a typed dict; raises ConfigError with
    the offending line number for unknown keys or bad values."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            continue  # sections are organizational
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        converter = _SCHEMA[key]
        try:
            if converter == "strlist":
                values[key] = tuple(p.strip() for p in value.split(",") if p.strip())
            else:
                values[key] = converter(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
    return values


def parse_config(path, scenario: str | None = None, **overrides) -> ScenarioConfig:
    """Read a config file into a ScenarioConfig.

    scenario and keyword overrides (seed, out, ...) take precedence over the
    file; the scenario must come from one of the two.
    """
    with open(path, encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    values.pop("scenarios", None)  # sweep key, not per-scenario
    if scenario is not None:
        values["scenario"] = scenario
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if "scenario" not in values:
        raise ConfigError("missing required key 'scenario'")
    return ScenarioConfig(**values)
