"""Run configuration: one flat dataclass, parsed from key=value files.

Config files are plain text: one ``key = value`` per line, ``#`` starts
a comment, blank lines are skipped.  Unknown keys and ill-typed values
raise :class:`ConfigError` naming the offending field, so a typo never
silently falls back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError

__all__ = ["SimConfig", "parse_config_text", "load_config", "apply_overrides"]

MODES = ("oracle", "spectral", "circuit-ideal", "circuit-trotter")


@dataclass(frozen=True)
class SimConfig:
    """Every knob of a simulation run.

    ``mode`` picks the simulation layer: ``oracle`` (classical ridge),
    ``spectral`` (singular-basis model), ``circuit-ideal`` (grid
    simulation with the exact coupling), ``circuit-trotter`` (grid
    simulation with the copy-consuming Trotter construction).
    ``trotter_steps = 0`` means ``round(1 / dt)``.
    """

    eta: float = 18.0
    chi: float = 0.1
    s: float = 1.5
    window_radius: float = 0.5
    dt: float = 0.1
    g: float = 1.0
    grid_points: int = 256
    grid_extent: float = 8.0
    trotter_steps: int = 0
    shots: int = 0
    seed: int = 1234
    mode: str = "oracle"
    infinite_squeezing: bool = False

    def __post_init__(self):
        positives = ("eta", "s", "window_radius", "grid_extent")
        for name in positives:
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be > 0, got {v}", field=name)
        for name in ("chi", "dt"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be >= 0, got {v}", field=name)
        if not (np.isfinite(self.g) and self.g > 0):
            raise ConfigError(f"g must be > 0, got {self.g}", field="g")
        for name in ("trotter_steps", "shots"):
            if getattr(self, name) < 0:
                raise ConfigError(
                    f"{name} must be >= 0, got {getattr(self, name)}", field=name
                )
        if self.grid_points < 8 or (self.grid_points & (self.grid_points - 1)):
            raise ConfigError(
                f"grid_points must be a power of two >= 8, got {self.grid_points}",
                field="grid_points",
            )
        if self.mode not in MODES:
            raise ConfigError(
                f"mode must be one of {MODES}, got {self.mode!r}", field="mode"
            )

    def resolved_steps(self) -> int:
        """Trotter step count, deriving ``round(1 / dt)`` when unset."""
        if self.trotter_steps > 0:
            return self.trotter_steps
        if self.dt <= 0:
            raise ConfigError(
                "either trotter_steps or a positive dt is required", field="dt"
            )
        return max(1, int(round(1.0 / self.dt)))


_FIELD_TYPES = {f.name: f.type for f in fields(SimConfig)}
_BOOL_WORDS = {"true": True, "1": True, "false": False, "0": False}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    raw = raw.strip()
    try:
        if kind == "bool":
            if raw.lower() not in _BOOL_WORDS:
                raise ValueError(f"expected true/false, got {raw!r}")
            return _BOOL_WORDS[raw.lower()]
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(
            f"bad value for {name}: {exc}", field=name
        ) from None


def parse_config_text(text: str) -> SimConfig:
    """Parse ``key = value`` lines into a validated config."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}", field=key)
        if key in values:
            raise ConfigError(f"duplicate config key {key!r}", field=key)
        values[key] = _coerce(key, raw)
    return SimConfig(**values)


def load_config(path: str | Path) -> SimConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text())


def apply_overrides(cfg: SimConfig, **overrides) -> SimConfig:
    """Return a copy with CLI-level overrides applied (validated again)."""
    clean = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}", field=key)
        clean[key] = _coerce(key, str(value)) if isinstance(value, str) else value
    if not clean:
        return cfg
    return replace(cfg, **clean)
