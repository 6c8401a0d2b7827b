"""Configuration helpers: process-wide settings and per-run configs."""
from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import yaml

from .errors import ConfigError

CONFIG_PATH = Path(__file__).resolve().parents[1] / "config" / "settings.yml"
ENV_SETTINGS = "TODA_GROWTH_SETTINGS"

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "paths": {"output_root": "./outputs", "log_name": "run.log"},
    "solver": {
        "string_tol": 1e-8,
        "newton_tol": 1e-12,
        "newton_max_iter": 50,
        "degeneracy_rtol": 1e-10,
        "cusp_tol": 1e-6,
        "collocation_points": 64,
    },
    "quadrature": {"start_nodes": 64, "max_nodes": 16384, "tol": 1e-11},
    "flows": {"delta": 1e-3, "leak_tol": 1e-9, "leak_violation": 1e-3},
    "logging": {"level": "INFO"},
    "progress": {"enabled": False},
}


@dataclass
class Settings:
    """In-memory representation of settings.yml."""

    paths: Dict[str, Any] = field(default_factory=dict)
    solver: Dict[str, Any] = field(default_factory=dict)
    quadrature: Dict[str, Any] = field(default_factory=dict)
    flows: Dict[str, Any] = field(default_factory=dict)
    logging: Dict[str, Any] = field(default_factory=dict)
    progress: Dict[str, Any] = field(default_factory=dict)

    def output_root(self) -> Path:
        return Path(self.paths.get("output_root", "./outputs")).expanduser().resolve()


_SETTINGS_CACHE: Optional[Settings] = None


def settings_path() -> Path:
    override = os.environ.get(ENV_SETTINGS)
    return Path(override) if override else CONFIG_PATH


def get_settings(refresh: bool = False) -> Settings:
    """Load project settings from YAML, filling gaps from the built-in defaults.

    Args:
        refresh: Force reload from disk if True.
    """

    global _SETTINGS_CACHE
    if _SETTINGS_CACHE is not None and not refresh:
        return _SETTINGS_CACHE

    path = settings_path()
    raw: Dict[str, Any] = {}
    if path.exists():
        with path.open("r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    elif os.environ.get(ENV_SETTINGS):
        raise FileNotFoundError(f"Settings file not found: {path}")

    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown settings section")
    merged = {section: {**values, **(raw.get(section) or {})} for section, values in DEFAULTS.items()}
    _SETTINGS_CACHE = Settings(**merged)
    return _SETTINGS_CACHE


@contextmanager
def overridden_settings(**sections: Dict[str, Any]) -> Iterator[Settings]:
    """Layer section values over the cached settings until the block exits."""

    global _SETTINGS_CACHE
    base = get_settings()
    layered = replace(base, **{name: {**getattr(base, name), **values} for name, values in sections.items()})
    _SETTINGS_CACHE = layered
    try:
        yield layered
    finally:
        _SETTINGS_CACHE = base


# run configs --------------------------------------------------------------
KINDS = ("polynomial", "rational", "logarithmic")
METHODS = ("ode", "newton", "both")
FUNCTION_KINDS = ("standard", "logarithmic", "rational_krichever")


@dataclass
class FlowEntry:
    function: str
    index: int
    barred: bool = False
    delta: float = field(default_factory=lambda: float(get_settings().flows.get("delta", 1e-3)))
    steps: int = 10


@dataclass
class GridEntry:
    N: int = 0
    m: int = 256
    L: float = 6.283185307179586
    amplitude: float = 1e-2
    hamiltonians: List[int] = field(default_factory=lambda: [1, 2])


@dataclass
class RunConfig:
    """A validated run description; ``raw`` keeps the tree as read for the manifest."""

    raw: Dict[str, Any]
    reduction: Dict[str, Any]
    x_range: List[float]
    steps: int
    method: str
    flows: List[FlowEntry]
    tolerances: Dict[str, float]
    seed: int
    samples: int
    k_max: Optional[int]
    grid: GridEntry
    string_tol: Optional[float] = None


def _number(value: Any, where: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"expected a number, got {value!r}") from exc


def _integer(value: Any, where: str, minimum: Optional[int] = None) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"expected an integer, got {value!r}") from exc
    if minimum is not None and out < minimum:
        raise ConfigError(where, f"must be >= {minimum}")
    return out


def _complex(value: Any, where: str) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(where, "complex values are [re, im]")
        return complex(_number(value[0], f"{where}[0]"), _number(value[1], f"{where}[1]"))
    return complex(_number(value, where))


def _complex_list(values: Any, where: str) -> List[complex]:
    if not isinstance(values, list):
        raise ConfigError(where, "expected a list")
    return [_complex(v, f"{where}[{i}]") for i, v in enumerate(values)]


def _validate_reduction(raw: Any) -> Dict[str, Any]:
    if not isinstance(raw, dict):
        raise ConfigError("reduction", "missing or not a mapping")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError("reduction.kind", f"must be one of {', '.join(KINDS)}")
    real = bool(raw.get("real_structure", False))
    clean: Dict[str, Any] = {
        "kind": kind,
        "real_structure": real,
        "physical": bool(raw.get("physical", False)),
        "r": _complex(raw.get("r", 1.0), "reduction.r"),
    }
    if kind == "polynomial":
        clean["u"] = _complex_list(raw.get("u", [0.0]), "reduction.u")
        if "ubar" in raw:
            clean["ubar"] = _complex_list(raw["ubar"], "reduction.ubar")
    elif kind == "rational":
        clean["u0"] = _complex(raw.get("u0", 0.0), "reduction.u0")
        clean["poles"] = _pole_list(raw.get("poles"), "reduction.poles")
        if "poles_bar" in raw:
            clean["ubar0"] = _complex(raw.get("ubar0", 0.0), "reduction.ubar0")
            clean["poles_bar"] = _pole_list(raw["poles_bar"], "reduction.poles_bar")
    else:
        clean["u"] = _complex(raw.get("u", 0.0), "reduction.u")
        clean["branch"] = _branch_list(raw.get("branch"), "reduction.branch")
        if "branch_bar" in raw:
            clean["ubar"] = _complex(raw.get("ubar", 0.0), "reduction.ubar")
            clean["branch_bar"] = _branch_list(raw["branch_bar"], "reduction.branch_bar")
    if not real:
        barred = {"polynomial": "ubar", "rational": "poles_bar", "logarithmic": "branch_bar"}[kind]
        if barred not in clean:
            raise ConfigError(f"reduction.{barred}", "required when real_structure is false")
    return clean


def _pole_list(values: Any, where: str) -> List[tuple]:
    if not isinstance(values, list) or not values:
        raise ConfigError(where, "expected a non-empty list of {u, w}")
    return [(_complex(v.get("u"), f"{where}[{i}].u"), _complex(v.get("w"), f"{where}[{i}].w")) for i, v in enumerate(values)]


def _branch_list(values: Any, where: str) -> List[tuple]:
    if not isinstance(values, list) or not values:
        raise ConfigError(where, "expected a non-empty list of {a, w}")
    out = []
    for i, v in enumerate(values):
        charge = v.get("a")
        if charge is None:
            raise ConfigError(f"{where}[{i}].a", "missing charge")
        if isinstance(charge, list):
            charge = [str(part) for part in charge]
        else:
            charge = str(charge)
        out.append((charge, _complex(v.get("w"), f"{where}[{i}].w")))
    return out


def _validate_flows(raw: Any) -> List[FlowEntry]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ConfigError("flows", "expected a list")
    flows = []
    for i, entry in enumerate(raw):
        where = f"flows[{i}]"
        kind = entry.get("function")
        if kind not in FUNCTION_KINDS:
            raise ConfigError(f"{where}.function", f"must be one of {', '.join(FUNCTION_KINDS)}")
        flows.append(
            FlowEntry(
                function=kind,
                index=_integer(entry.get("index", 1), f"{where}.index", 0),
                barred=bool(entry.get("barred", False)),
                delta=_number(entry.get("delta", get_settings().flows.get("delta", 1e-3)), f"{where}.delta"),
                steps=_integer(entry.get("steps", 10), f"{where}.steps", 1),
            )
        )
    return flows


def _validate_grid(raw: Any) -> GridEntry:
    raw = raw or {}
    grid = GridEntry(
        N=_integer(raw.get("N", 0), "grid.N", 0),
        m=_integer(raw.get("m", 256), "grid.m", 8),
        L=_number(raw.get("L", 6.283185307179586), "grid.L"),
        amplitude=_number(raw.get("amplitude", 1e-2), "grid.amplitude"),
        hamiltonians=[_integer(h, f"grid.hamiltonians[{i}]", 1) for i, h in enumerate(raw.get("hamiltonians", [1, 2]))],
    )
    if grid.m & (grid.m - 1):
        raise ConfigError("grid.m", "must be a power of two")
    return grid


def parse_run_config(raw: Dict[str, Any], require_reduction: bool = True) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    x_range = raw.get("x_range", [0.0, 1.0])
    if not isinstance(x_range, list) or len(x_range) != 2:
        raise ConfigError("x_range", "expected [x_start, x_end]")
    method = raw.get("method", "ode")
    if method not in METHODS:
        raise ConfigError("method", f"must be one of {', '.join(METHODS)}")
    tolerances = raw.get("tolerances") or {}
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances", "expected a mapping")
    k_max = raw.get("k_max")
    samples = _integer(raw.get("samples", 256), "samples", 8)
    if samples & (samples - 1):
        raise ConfigError("samples", "must be a power of two")
    return RunConfig(
        raw=raw,
        reduction=_validate_reduction(raw.get("reduction")) if (require_reduction or "reduction" in raw) else {},
        x_range=[_number(x_range[0], "x_range[0]"), _number(x_range[1], "x_range[1]")],
        steps=_integer(raw.get("steps", 100), "steps", 1),
        method=method,
        flows=_validate_flows(raw.get("flows")),
        tolerances={key: _number(value, f"tolerances.{key}") for key, value in tolerances.items()},
        seed=_integer(raw.get("seed", 0), "seed", 0),
        samples=samples,
        k_max=_integer(k_max, "k_max", 1) if k_max is not None else None,
        grid=_validate_grid(raw.get("grid")),
        string_tol=_number(raw["string_tol"], "string_tol") if raw.get("string_tol") is not None else None,
    )


def load_run_config(path: Path, require_reduction: bool = True) -> RunConfig:
    if not path.exists():
        raise ConfigError(str(path), "config file not found")
    try:
        with path.open("r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark is not None else str(path)
        raise ConfigError(where, f"invalid YAML ({exc.__class__.__name__})") from exc
    return parse_run_config(raw, require_reduction)
