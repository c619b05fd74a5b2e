"""Experiment configuration: JSON schema by example, unit conversion, validation.

A config is a JSON object

    {"schema_version": 1, "experiment": "<name>", "source": {...}, "setup": {...},
     "sweep": {...}, "grid": {...}, "output_dir": null, "seed": 0,
     "time_unit_s": 1e-12}

Every section is optional; missing keys take the experiment defaults.  A
dimensional number may be a bare number (already in natural units, i.e. in
multiples of ``time_unit_s``) or ``{"value": 2.5, "unit": "ps"}``.  Sweeps are
either explicit lists or ``{"start", "stop", "num", "endpoint", "unit"}``.
Everything is converted to natural units exactly once, here.
"""

from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from ..errors import NonlocalOpticsError

SCHEMA_VERSION = 1
TWO_PI = 2 * math.pi


class ConfigError(NonlocalOpticsError, ValueError):
    """Invalid configuration; the message starts with the offending field path."""


# ---------------------------------------------------------------------------
# Units
# ---------------------------------------------------------------------------

_PREFIX = {"f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3,
           "c": 1e-2, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}
# base unit -> (scale, time exponent, length exponent)
_BASE = {"s": (1.0, 1, 0), "m": (1.0, 0, 1), "rad": (1.0, 0, 0)}
_TOKEN = re.compile(r"^([A-Za-zµ]+)(?:\^(-?\d+))?$")


def _parse_token(tok: str):
    m = _TOKEN.match(tok)
    if not m:
        raise ValueError(f"cannot parse unit token {tok!r}")
    name, exp = m.group(1), int(m.group(2) or 1)
    if name in _BASE:
        scale, te, le = _BASE[name]
    elif name[:1] in _PREFIX and name[1:] in _BASE:
        base = _BASE[name[1:]]
        scale, te, le = _PREFIX[name[:1]] * base[0], base[1], base[2]
    else:
        raise ValueError(f"unknown unit {name!r}")
    return scale**exp, te * exp, le * exp


def parse_unit(unit: str) -> tuple[float, int, int]:
    """'fs^2/mm' -> (SI scale, time exponent, length exponent)."""
    scale, te, le = 1.0, 0, 0
    parts = unit.replace(" ", "").split("/")
    if len(parts) > 2 or not parts[0]:
        raise ValueError(f"cannot parse unit {unit!r}")
    for k, part in enumerate(parts):
        sign = 1 if k == 0 else -1
        for tok in part.split("*"):
            if tok == "1":
                continue
            s, t, l = _parse_token(tok)
            scale *= s**sign
            te += sign * t
            le += sign * l
    return scale, te, le


def to_natural(value: float, unit: str, dim: int, time_unit_s: float) -> float:
    """Convert to natural units (c = 1, times in multiples of ``time_unit_s``).

    ``dim`` is the expected power of time once lengths are counted as times.
    """
    scale, te, le = parse_unit(unit)
    if te + le != dim:
        raise ValueError(f"unit {unit!r} has dimension time^{te + le}, expected time^{dim}")
    return value * scale / (time_unit_s**te * (SPEED_OF_LIGHT * time_unit_s) ** le)


# ---------------------------------------------------------------------------
# Schema markers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Q:
    """A dimensional number: default (natural units) and time dimension."""

    default: float | None
    dim: int = 0


@dataclass(frozen=True)
class Sweep:
    default: Any
    dim: int = 0


@dataclass(frozen=True)
class Choice:
    default: Any
    options: tuple


@dataclass(frozen=True)
class Optional_:
    """A value that may be null; ``inner`` describes the non-null form."""

    inner: Any


def _full_period(num=16):
    return {"start": 0.0, "stop": TWO_PI, "num": num, "endpoint": False}


SOURCES = {
    "cascade": {"sum_frequency": Q(0.0, -1), "tau1": Q(100.0, 1), "tau2": Q(1.0, 1),
                "omega2": Optional_(Q(None, -1))},
    "gaussian-pdc": {"omega01": Q(0.0, -1), "omega02": Q(0.0, -1),
                     "sigma_plus": Q(0.0072, -1), "sigma_minus": Q(1.0, -1)},
    "time-bin": {"pulse_width": Q(1.0, 1), "separation": Q(10.0, 1), "phase": 0.0},
}

GRIDS = {
    "cascade": {"n": 2048, "span": Q(10.0, -1), "centers": Optional_([Q(0.0, -1), Q(0.0, -1)])},
    "gaussian-pdc": {"n": 1024, "span": Q(5.9, -1), "centers": Optional_([Q(0.0, -1), Q(0.0, -1)])},
    "time-bin": {"n": 512, "span": Q(128.0, 1), "centers": Optional_([Q(0.0, 1), Q(0.0, 1)])},
}

_FRANSON_SETUP = {"delay": Q(9.0, 1), "window": Q(3.0, 1), "ports": ["H", "H"],
                  "arrival_window": Optional_([Q(0.0, 1), Q(0.0, 1)])}
_HOM_SOURCE = ("gaussian-pdc", {"sigma_plus": 0.02})
_HOM_GRID = {"n": 1024, "span": 6.0}
_MEDIUM = {"k0": Q(0.0, -1), "k1": Q(0.0, 0), "k2": Q(5.0, 1), "length": Q(1.0, 1)}

# experiment -> defaults: source (type, overrides), grid overrides, setup, sweep
EXPERIMENTS: dict[str, dict] = {
    "franson-fringes": {
        "description": "Coincidence fringes over a (phi1, phi2) grid",
        "source": ("gaussian-pdc", {}), "grid": {},
        "setup": _FRANSON_SETUP,
        "sweep": {"phi1": Sweep(_full_period()), "phi2": Sweep(_full_period())},
    },
    "chsh": {
        "description": "CHSH S versus fringe visibility as the delay grows",
        "source": ("gaussian-pdc", {}), "grid": {},
        "setup": {**_FRANSON_SETUP,
                  "settings": {"a": 0.0, "a_prime": math.pi / 2, "b": -math.pi / 4,
                               "b_prime": math.pi / 4},
                  "minus": Choice("a'b'", ("ab", "ab'", "a'b", "a'b'"))},
        "sweep": {"delay": Sweep([9.0, 40.0, 80.0, 100.0, 115.0, 120.0, 130.0, 150.0], 1)},
    },
    "classical-bound": {
        "description": "Classical-field visibility bound versus simulated visibility",
        "source": ("cascade", {}), "grid": {},
        "setup": {"window": Q(2.5, 1), "n_phases": 16},
        "sweep": {"delay": Sweep([8.0], 1)},
    },
    "hom-dip": {
        "description": "Hong-Ou-Mandel coincidence probability versus delay",
        "source": _HOM_SOURCE, "grid": _HOM_GRID,
        "setup": {},
        "sweep": {"tau": Sweep({"start": -8.0, "stop": 8.0, "num": 161, "endpoint": True}, 1)},
    },
    "hom-dispersion": {
        "description": "HOM dip with and without a dispersive medium in one arm",
        "source": _HOM_SOURCE, "grid": _HOM_GRID,
        "setup": {"medium": _MEDIUM},
        "sweep": {"tau": Sweep({"start": -30.0, "stop": 30.0, "num": 601, "endpoint": True}, 1)},
    },
    "nonlocal-dispersion": {
        "description": "Correlation-width ratio for opposite and same-sign media",
        "source": _HOM_SOURCE, "grid": _HOM_GRID,
        "setup": {},
        "sweep": {"gdd": Sweep([0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 2)},
    },
    "propagator-map": {
        "description": "Magnitude of the Feynman propagator on an (x, t) grid",
        "source": None, "grid": None,
        "setup": {"eps": Q(1e-3, 2)},
        "sweep": {"x": Sweep({"start": -2.0, "stop": 2.0, "num": 81, "endpoint": True}, 1),
                  "t": Sweep({"start": -2.0, "stop": 2.0, "num": 81, "endpoint": True}, 1)},
    },
    "two-atom-entanglement": {
        "description": "Transfer amplitude, post-selection and balancing versus separation",
        "source": None, "grid": None,
        "setup": {"omega": Q(math.pi, -1), "dipole": Q(1.0, 1), "duration": Q(1.0, 1),
                  "p_gamma": 0.5, "random_p_gamma": False},
        "sweep": {"separation": Sweep([100.0, 200.0, 500.0, 1000.0], 1)},
    },
    "rwa-artifact": {
        "description": "RWA detection-probability proxy outside the light cone",
        "source": None, "grid": None,
        "setup": {"t": Q(1.0, 1), "eps": Q(1e-6, 2)},
        "sweep": {"r": Sweep({"start": 10.0, "stop": 100.0, "num": 10, "endpoint": True}, 1)},
    },
}


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment: str
    source: dict | None
    grid: dict | None
    setup: dict
    sweep: dict
    output_dir: str | None = None
    seed: int = 0
    time_unit_s: float = 1e-12
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        return d


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _quantity(value, q: Q, path: str, tu: float) -> float:
    if isinstance(value, dict):
        unknown = set(value) - {"value", "unit"}
        if unknown or "value" not in value:
            raise ConfigError(f"{path}: quantity must be a number or {{'value', 'unit'}}")
        v = value["value"]
        if not _is_number(v):
            raise ConfigError(f"{path}.value: expected a number, got {type(v).__name__}")
        unit = value.get("unit")
        if unit is None:
            return float(v)
        if not isinstance(unit, str):
            raise ConfigError(f"{path}.unit: expected a string")
        try:
            return float(to_natural(float(v), unit, q.dim, tu))
        except ValueError as exc:
            raise ConfigError(f"{path}.unit: {exc}") from None
    if not _is_number(value):
        raise ConfigError(f"{path}: expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    return float(value)


def _sweep(value, sw: Sweep, path: str, tu: float) -> list[float]:
    q = Q(None, sw.dim)
    if isinstance(value, list):
        return [_quantity(v, q, f"{path}[{i}]", tu) for i, v in enumerate(value)]
    if isinstance(value, dict):
        allowed = {"start", "stop", "num", "endpoint", "unit"}
        unknown = sorted(set(value) - allowed)
        if unknown:
            raise ConfigError(f"{path}.{unknown[0]}: unknown key")
        for key in ("start", "stop", "num"):
            if key not in value:
                raise ConfigError(f"{path}.{key}: required")
        num = value["num"]
        if not isinstance(num, int) or isinstance(num, bool) or num < 0:
            raise ConfigError(f"{path}.num: expected a non-negative integer")
        endpoint = value.get("endpoint", True)
        if not isinstance(endpoint, bool):
            raise ConfigError(f"{path}.endpoint: expected true or false")
        unit = value.get("unit")
        ends = []
        for key in ("start", "stop"):
            raw = value[key] if unit is None else {"value": value[key], "unit": unit}
            ends.append(_quantity(raw, q, f"{path}.{key}", tu))
        return [float(x) for x in np.linspace(ends[0], ends[1], num, endpoint=endpoint)]
    raise ConfigError(f"{path}: expected a list or a range object")


def _resolve(template, value, path: str, tu: float):
    """Merge ``value`` over ``template`` and convert to natural units."""
    if isinstance(template, Optional_):
        if value is None:
            return None
        return _resolve(template.inner, value, path, tu)
    if isinstance(template, Q):
        if value is None:
            if template.default is None:
                return None
            return float(template.default)
        return _quantity(value, template, path, tu)
    if isinstance(template, Sweep):
        return _sweep(template.default if value is None else value, template, path, tu)
    if isinstance(template, Choice):
        v = template.default if value is None else value
        if v not in template.options:
            raise ConfigError(f"{path}: must be one of {list(template.options)}, got {v!r}")
        return v
    if isinstance(template, dict):
        if value is None:
            value = {}
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object, got {type(value).__name__}")
        unknown = sorted(set(value) - set(template))
        if unknown:
            raise ConfigError(f"{path}.{unknown[0]}: unknown key")
        return {k: _resolve(t, value.get(k), f"{path}.{k}", tu) for k, t in template.items()}
    if isinstance(template, list):
        if value is None:
            return _resolve_list_default(template, path, tu)
        if not isinstance(value, list) or len(value) != len(template):
            raise ConfigError(f"{path}: expected a list of length {len(template)}")
        return [_resolve(t, v, f"{path}[{i}]", tu) for i, (t, v) in enumerate(zip(template, value))]
    # plain default value: type must match
    if value is None:
        return copy.deepcopy(template)
    if isinstance(template, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true or false")
        return value
    if isinstance(template, int):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if isinstance(template, float):
        if not _is_number(value):
            raise ConfigError(f"{path}: expected a number, got {type(value).__name__}")
        return float(value)
    if isinstance(template, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
        return value
    raise ConfigError(f"{path}: unsupported value")  # pragma: no cover


def _resolve_list_default(template, path, tu):
    return [_resolve(t, None, f"{path}[{i}]", tu) for i, t in enumerate(template)]


def _overlay(template: dict, overrides: dict) -> dict:
    out = dict(template)
    for k, v in overrides.items():
        t = out[k]
        out[k] = Q(v, t.dim) if isinstance(t, Q) else v
    return out


def _section_templates(name: str, raw_source):
    exp = EXPERIMENTS[name]
    if exp["source"] is None:
        return None, None
    default_type, source_overrides = exp["source"]
    stype = default_type
    if isinstance(raw_source, dict) and "type" in raw_source:
        stype = raw_source["type"]
        if stype not in SOURCES:
            raise ConfigError(f"source.type: must be one of {sorted(SOURCES)}, got {stype!r}")
    src = SOURCES[stype]
    grid = GRIDS[stype]
    if stype == default_type:
        src = _overlay(src, source_overrides)
        grid = _overlay(grid, exp["grid"])
    return {"type": Choice(stype, (stype,)), **src}, grid


TOP_KEYS = ("schema_version", "experiment", "source", "grid", "setup", "sweep",
            "output_dir", "seed", "time_unit_s")


def resolve_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("$: config must be a JSON object")
    unknown = sorted(set(raw) - set(TOP_KEYS))
    if unknown:
        raise ConfigError(f"$.{unknown[0]}: unknown key")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"$.schema_version: unsupported version {version!r}")
    name = raw.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"$.experiment: unknown experiment {name!r}; "
                          f"choose from {sorted(EXPERIMENTS)}")
    tu = raw.get("time_unit_s", 1e-12)
    if not _is_number(tu) or not tu > 0:
        raise ConfigError("$.time_unit_s: expected a positive number")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError("$.seed: expected an integer in [0, 2^64)")
    out_dir = raw.get("output_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("$.output_dir: expected a string or null")

    exp = EXPERIMENTS[name]
    src_t, grid_t = _section_templates(name, raw.get("source"))
    if src_t is None:
        for key in ("source", "grid"):
            if raw.get(key) is not None:
                raise ConfigError(f"$.{key}: experiment {name!r} takes no {key}")
        source = grid = None
    else:
        source = _resolve(src_t, raw.get("source"), "$.source", tu)
        grid = _resolve(grid_t, raw.get("grid"), "$.grid", tu)
    setup = _resolve(exp["setup"], raw.get("setup"), "$.setup", tu)
    sweep = _resolve(exp["sweep"], raw.get("sweep"), "$.sweep", tu)
    cfg = ExperimentConfig(name, source, grid, setup, sweep, out_dir, seed, float(tu))
    validate_invariants(cfg)
    return cfg


def validate_invariants(cfg: ExperimentConfig) -> None:
    """Construct the cheap domain objects so invariant violations surface at parse time."""
    from . import experiments

    try:
        experiments.check(cfg)
    except ConfigError:
        raise
    except (NonlocalOpticsError, ValueError) as exc:
        raise ConfigError(f"invalid parameters: {exc}") from None


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$: invalid JSON ({exc})") from None
    return resolve_config(raw)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Resolved config as JSON; parsing it again yields an equal config."""
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
