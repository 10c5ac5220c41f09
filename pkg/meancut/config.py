"""
config.py
---------
Numeric knobs for every method, with optional overrides from a `.env` file.

The process environment is never consulted: values come from the defaults
below, then from an explicitly named `.env` file (keys prefixed MEANCUT_),
then from keyword overrides (the CLI flags).
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Union

from dotenv import dotenv_values

from meancut.binet import QuadratureSpec
from meancut.errors import ConfigError

ENV_PREFIX = "MEANCUT_"


@dataclass(frozen=True)
class Settings:
    # Binet quadrature
    quad_tol: float = 1e-10
    t_split: float = 1.0
    series_order: int = 12
    max_subdiv: int = 200
    # Raab V series
    series_tol: float = 1e-8
    series_cap: int = 10_000_000
    c_max: float = 1.05
    tail_mode: str = "euler_maclaurin"
    # exact oracle
    karamata_max_depth: int = 64
    exact_switchover: int = 2000
    exact_scan_max: int = 60
    float_margin: float = 1e-9
    # fits
    slope_window: float = 0.15
    r2_min: float = 0.98
    # runtime
    n_jobs: int = 1

    def __post_init__(self):
        positive = ["quad_tol", "series_tol", "c_max", "slope_window", "float_margin"]
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)!r}")
        for name in ["series_order", "max_subdiv", "series_cap", "karamata_max_depth",
                     "exact_switchover", "exact_scan_max"]:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)!r}")
        if not 0 < self.t_split < 6.283185307179586:
            raise ConfigError(f"t_split must lie in (0, 2*pi), got {self.t_split!r}")
        if not 0 <= self.r2_min <= 1:
            raise ConfigError(f"r2_min must lie in [0, 1], got {self.r2_min!r}")
        if self.tail_mode not in ("euler_maclaurin", "bound"):
            raise ConfigError(f"unknown tail_mode {self.tail_mode!r}")
        if self.n_jobs == 0:
            raise ConfigError("n_jobs must be nonzero (use -1 for all cores)")

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec(
            t_split=self.t_split,
            series_order=self.series_order,
            tol=self.quad_tol,
            max_subdiv=self.max_subdiv,
        )


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in fields(Settings)}[name]
    try:
        if kind in (int, "int"):
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        if kind in (float, "float"):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{ENV_PREFIX}{name.upper()}={raw!r} is not a valid {kind}") from exc
    return raw


def load_settings(env_file: Optional[Union[str, Path]] = None, **overrides) -> Settings:
    """Defaults, then the named .env file, then explicit overrides"""
    values = {}
    if env_file is not None:
        path = Path(env_file)
        if not path.exists():
            raise ConfigError(f"env file not found: {path}")
        known = {f.name for f in fields(Settings)}
        for key, raw in dotenv_values(path).items():
            if not key.startswith(ENV_PREFIX) or raw is None:
                continue
            name = key[len(ENV_PREFIX):].lower()
            if name not in known:
                raise ConfigError(f"unknown setting {key}")
            values[name] = _coerce(name, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return replace(Settings(), **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
