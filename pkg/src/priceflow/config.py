"""Run configuration: flat TOML key-value files with documented defaults."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .datum import Datum, PRESET_NAMES, make_datum, preset
from .heatflow import HeatField
from .refsolver import FDGrid
from .transform import forward_transform

__all__ = ["ParseError", "UnknownKey", "ValidationError", "RunConfig", "parse_config"]


class ParseError(ValueError):
    """Configuration text is not valid TOML."""


class UnknownKey(ValueError):
    """Configuration contains a key that is not documented."""


class ValidationError(ValueError):
    """Configuration values are inconsistent or out of range."""


#: every accepted key with (type check, description)
KNOWN_KEYS = {
    "datum": "preset name: tent | skew | zero-mass-asym | custom",
    "knots": "custom datum knots (strictly increasing reals)",
    "values": "custom datum values at the knots",
    "p0": "custom datum initial price",
    "a": "transaction cost (also overrides a preset's default)",
    "method": "heat | fd | both",
    "times": "explicit sample times (strictly increasing, positive)",
    "t_min": "log-spaced times: smallest time (> 0)",
    "t_max": "log-spaced times: largest time",
    "t_count": "log-spaced times: number of points",
    "xtol": "price bisection tolerance",
    "tail_tolerance": "absolute truncation budget of the heat evaluator",
    "L": "half-width of the FD domain [-L, L]",
    "n": "FD cell count",
    "dt": "FD time step (default h/4 implicit, 0.4 h^2 explicit)",
    "scheme": "FD scheme: implicit | explicit",
    "dt_growth": "FD step growth rate ~ dt_growth * sqrt(t) (implicit only)",
    "gate": "compare: acceptable max |p_heat - p_fd|",
    "plot": "render figures alongside the CSV output",
    "gnuplot": "also emit a gnuplot script for the trajectory CSV",
    "out": "output directory",
    "x_min": "field/dump window: left edge",
    "x_max": "field/dump window: right edge",
    "x_count": "field/dump window: sample count",
    "fit_t_min": "asympt: fit window start",
    "fit_t_max": "asympt: fit window end",
}


@dataclass
class RunConfig:
    """Validated run parameters with the datum already built."""

    datum_name: str = "tent"
    datum: Datum = field(default=None, repr=False)
    method: str = "heat"
    times: np.ndarray | None = None
    t_min: float = 0.1
    t_max: float = 10.0
    t_count: int | None = None
    xtol: float = 1e-8
    tail_tolerance: float = 1e-10
    L: float = 30.0
    n: int = 15000
    dt: float | None = None
    scheme: str = "implicit"
    dt_growth: float = 0.0
    gate: float = 5e-2
    plot: bool = True
    gnuplot: bool = False
    out: str = "."
    x_min: float = -5.0
    x_max: float = 5.0
    x_count: int = 201
    fit_t_min: float | None = None
    fit_t_max: float | None = None

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    def resolve_times(self) -> np.ndarray:
        """Explicit list when given, else log-spaced (20 points per decade)."""
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        count = self.t_count
        if count is None:
            decades = math.log10(self.t_max / self.t_min)
            count = max(2, int(round(20.0 * decades)) + 1)
        return np.geomspace(self.t_min, self.t_max, count)

    def resolve_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        if self.scheme == "explicit":
            return 0.4 * self.h * self.h
        return 0.25 * self.h

    def fd_grid(self) -> FDGrid:
        return FDGrid(L=self.L, n=self.n, dt=self.resolve_dt(), scheme=self.scheme)

    def heat_field(self) -> HeatField:
        return HeatField(forward_transform(self.datum), self.tail_tolerance)

    def fit_window(self) -> tuple[float, float]:
        """Explicit fit window, else the last decade of the time grid."""
        ts = self.resolve_times()
        hi = self.fit_t_max if self.fit_t_max is not None else float(ts[-1])
        lo = self.fit_t_min if self.fit_t_min is not None else hi / 10.0
        return lo, hi


def _require(cond: bool, msg: str):
    if not cond:
        raise ValidationError(msg)


def _as_float(raw, key) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValidationError(f"{key} must be a number, got {raw!r}")
    return float(raw)


def _as_float_list(raw, key) -> list[float]:
    if not isinstance(raw, list) or not raw:
        raise ValidationError(f"{key} must be a non-empty array of numbers")
    return [_as_float(v, key) for v in raw]


def parse_config(text: str) -> RunConfig:
    """Parse and validate flat TOML configuration text.

    Unknown keys raise UnknownKey; syntax problems raise ParseError with
    the parser's line diagnostics; value problems (including datum
    construction failures) raise ValidationError.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"config is not valid TOML: {exc}") from exc

    unknown = sorted(set(raw) - set(KNOWN_KEYS))
    if unknown:
        raise UnknownKey(f"unknown configuration keys: {', '.join(unknown)}")

    cfg = RunConfig()

    name = raw.get("datum", "tent")
    _require(isinstance(name, str), "datum must be a string")
    cfg.datum_name = name
    a_override = _as_float(raw["a"], "a") if "a" in raw else None

    if name == "custom":
        for key in ("knots", "values", "p0", "a"):
            _require(key in raw, f"datum='custom' requires key {key!r}")
        try:
            cfg.datum = make_datum(
                _as_float_list(raw["knots"], "knots"),
                _as_float_list(raw["values"], "values"),
                _as_float(raw["p0"], "p0"),
                a_override,
            )
        except ValueError as exc:
            raise ValidationError(f"invalid custom datum: {exc}") from exc
    elif name in PRESET_NAMES:
        for key in ("knots", "values", "p0"):
            _require(key not in raw, f"key {key!r} only applies to datum='custom'")
        cfg.datum = preset(name) if a_override is None else preset(name, a_override)
    else:
        raise ValidationError(
            f"unknown datum {name!r}; choose from {PRESET_NAMES + ('custom',)}"
        )

    method = raw.get("method", "heat")
    _require(method in ("heat", "fd", "both"), f"method must be heat|fd|both, got {method!r}")
    cfg.method = method

    if "times" in raw:
        for key in ("t_min", "t_max", "t_count"):
            _require(key not in raw, "give either times or t_min/t_max/t_count, not both")
        ts = np.asarray(_as_float_list(raw["times"], "times"), dtype=float)
        _require(bool(np.all(ts > 0)), "times must be positive")
        _require(bool(np.all(np.diff(ts) > 0)), "times must be strictly increasing")
        cfg.times = ts
    else:
        if "t_min" in raw:
            cfg.t_min = _as_float(raw["t_min"], "t_min")
        if "t_max" in raw:
            cfg.t_max = _as_float(raw["t_max"], "t_max")
        _require(cfg.t_min > 0, "t_min must be positive for log spacing")
        _require(cfg.t_max > cfg.t_min, "t_max must exceed t_min")
        if "t_count" in raw:
            count = raw["t_count"]
            _require(isinstance(count, int) and count >= 2, "t_count must be an integer >= 2")
            cfg.t_count = count

    for key, attr, check, msg in (
        ("xtol", "xtol", lambda v: v > 0, "xtol must be positive"),
        ("tail_tolerance", "tail_tolerance", lambda v: v > 0, "tail_tolerance must be positive"),
        ("L", "L", lambda v: v > 0, "L must be positive"),
        ("dt", "dt", lambda v: v > 0, "dt must be positive"),
        ("dt_growth", "dt_growth", lambda v: v >= 0, "dt_growth must be nonnegative"),
        ("gate", "gate", lambda v: v > 0, "gate must be positive"),
        ("x_min", "x_min", lambda v: True, ""),
        ("x_max", "x_max", lambda v: True, ""),
        ("fit_t_min", "fit_t_min", lambda v: v > 0, "fit_t_min must be positive"),
        ("fit_t_max", "fit_t_max", lambda v: v > 0, "fit_t_max must be positive"),
    ):
        if key in raw:
            val = _as_float(raw[key], key)
            _require(check(val), msg)
            setattr(cfg, attr, val)
    _require(cfg.x_max > cfg.x_min, "x_max must exceed x_min")

    if "n" in raw:
        _require(isinstance(raw["n"], int) and raw["n"] >= 2, "n must be an integer >= 2")
        cfg.n = raw["n"]
    if "x_count" in raw:
        _require(
            isinstance(raw["x_count"], int) and raw["x_count"] >= 2,
            "x_count must be an integer >= 2",
        )
        cfg.x_count = raw["x_count"]
    if "scheme" in raw:
        _require(
            raw["scheme"] in ("implicit", "explicit"),
            f"scheme must be implicit|explicit, got {raw['scheme']!r}",
        )
        cfg.scheme = raw["scheme"]
    for key in ("plot", "gnuplot"):
        if key in raw:
            _require(isinstance(raw[key], bool), f"{key} must be a boolean")
            setattr(cfg, key, raw[key])
    if "out" in raw:
        _require(isinstance(raw["out"], str), "out must be a string")
        cfg.out = raw["out"]

    return cfg
