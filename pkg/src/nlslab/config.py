"""Run configuration: a JSON document validated key by key.

Physics parameters have no defaults; only output paths do.  Example::

    {
      "grid":    {"n": 256, "length": 40.0},
      "params":  {"sigma": -1, "lambda": 1.0, "p": 3},
      "initial": {"type": "soliton", "a": 1.0, "x0": 0.0},
      "solver":  {"dt": 0.001, "t_end": 1.0, "integrator": "strang",
                  "record_every": 10},
      "outputs": {"diagnostics_path": "diagnostics.csv"}
    }

``initial.type`` is one of ``plane_wave`` (``A``, ``k_index``), ``soliton``
(``a``, ``x0``, optional ``velocity``), ``gaussian`` (``A``, ``x0``, ``k0``,
``w``) or ``file`` (``path`` to an ``x,re,im`` snapshot, relative to the
config file).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .dynamics import (
    NlsParams,
    SolverConfig,
    bright_soliton,
    gaussian_packet,
    plane_wave,
)
from .analysis.smoothing import EnsembleSpec
from .spectral import ComplexField1D, Grid1D, read_snapshot

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "load_ensemble", "parse_ensemble"]


class ConfigError(ValueError):
    """Schema violation; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


_INITIAL_KEYS = {
    "plane_wave": ({"A", "k_index"}, set()),
    "soliton": ({"a", "x0"}, {"velocity"}),
    "gaussian": ({"A", "x0", "k0", "w"}, set()),
    "file": ({"path"}, set()),
}


@dataclass(frozen=True, eq=False)
class RunConfig:
    grid: Grid1D
    params: NlsParams
    initial: dict
    solver: SolverConfig
    diagnostics_path: str = "diagnostics.csv"
    fields_dir: str | None = None
    base_dir: Path = Path(".")

    def initial_field(self) -> ComplexField1D:
        return build_initial(self.initial, self.grid, self.params, self.base_dir)

    def exact_solution(self, t: float) -> ComplexField1D | None:
        """Closed-form solution at time ``t`` when the initial datum has one."""
        kind = self.initial["type"]
        if kind == "plane_wave":
            return plane_wave(self.initial["A"], self.initial["k_index"], self.grid, self.params, t)
        if kind == "soliton" and self.params.sigma == -1 and self.params.p == 3 and not self.params.linear:
            ini = self.initial
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                return bright_soliton(ini["a"], ini["x0"], self.grid, t, ini.get("velocity", 0.0))
        return None


def _section(doc: dict, key: str, required: set[str], optional: set[str] = frozenset(), prefix: str = "") -> dict:
    path = f"{prefix}{key}"
    if key not in doc:
        raise ConfigError(path, "missing section")
    sec = doc[key]
    if not isinstance(sec, dict):
        raise ConfigError(path, "must be an object")
    for k in sec:
        if k not in required and k not in optional:
            raise ConfigError(f"{path}.{k}", "unknown key")
    for k in sorted(required):
        if k not in sec:
            raise ConfigError(f"{path}.{k}", "missing required key")
    return sec


def _num(sec: dict, key: str, path: str, integer: bool = False) -> float | int:
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"must be a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", "must be finite")
    if integer:
        if int(v) != v:
            raise ConfigError(f"{path}.{key}", f"must be an integer, got {v!r}")
        return int(v)
    return float(v)


def _bool(sec: dict, key: str, path: str, default: bool) -> bool:
    v = sec.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"{path}.{key}", f"must be true or false, got {v!r}")
    return v


def _wrap(key: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(key, str(exc)) from None


def build_initial(spec: dict, grid: Grid1D, params: NlsParams, base_dir: Path = Path(".")) -> ComplexField1D:
    kind = spec["type"]
    if kind == "plane_wave":
        return _wrap("initial", plane_wave, spec["A"], spec["k_index"], grid, params, 0.0)
    if kind == "soliton":
        return _wrap("initial", bright_soliton, spec["a"], spec["x0"], grid, 0.0, spec.get("velocity", 0.0))
    if kind == "gaussian":
        return _wrap("initial", gaussian_packet, spec["A"], spec["x0"], spec["k0"], spec["w"], grid)
    path = Path(spec["path"])
    if not path.is_absolute():
        path = base_dir / path
    if not path.is_file():
        raise ConfigError("initial.path", f"no such file: {path}")
    return _wrap("initial.path", read_snapshot, path, grid)


def parse_config(doc: Any, base_dir: Path | str = ".", dealias: bool | None = None) -> RunConfig:
    """Validate ``doc`` and build a :class:`RunConfig`.

    Every error is a :class:`ConfigError` naming the offending key.
    """
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    top = {"grid", "params", "initial", "solver"}
    for k in doc:
        if k not in top | {"outputs"}:
            raise ConfigError(k, "unknown key")

    g = _section(doc, "grid", {"n", "length"})
    n = _num(g, "n", "grid", integer=True)
    if n < 8 or n & (n - 1):
        raise ConfigError("grid.n", f"must be a power of two >= 8, got {n}")
    length = _num(g, "length", "grid")
    if length <= 0:
        raise ConfigError("grid.length", f"must be positive, got {length}")
    grid = Grid1D(n, length)

    p = _section(doc, "params", {"sigma", "lambda", "p"}, {"linear"})
    sigma = _num(p, "sigma", "params", integer=True)
    if sigma not in (1, -1):
        raise ConfigError("params.sigma", f"must be +1 or -1, got {sigma}")
    lam = _num(p, "lambda", "params")
    if lam < 1:
        raise ConfigError("params.lambda", f"must be >= 1, got {lam}")
    order = _num(p, "p", "params", integer=True)
    if order < 3 or order % 2 != 1:
        raise ConfigError("params.p", f"must be an odd integer >= 3, got {order}")
    params = NlsParams(sigma, lam, order, _bool(p, "linear", "params", False))

    if "initial" not in doc or not isinstance(doc["initial"], dict):
        raise ConfigError("initial", "missing section or not an object")
    kind = doc["initial"].get("type")
    if kind not in _INITIAL_KEYS:
        raise ConfigError("initial.type", f"must be one of {sorted(_INITIAL_KEYS)}, got {kind!r}")
    req, opt = _INITIAL_KEYS[kind]
    ini = _section(doc, "initial", req | {"type"}, opt)
    initial: dict[str, Any] = {"type": kind}
    for key in sorted((req | opt) & set(ini)):
        if key == "path":
            if not isinstance(ini[key], str) or not ini[key]:
                raise ConfigError("initial.path", "must be a non-empty string")
            initial[key] = ini[key]
        else:
            initial[key] = _num(ini, key, "initial", integer=(key == "k_index"))

    s = _section(doc, "solver", {"dt", "t_end", "integrator"}, {"record_every", "dealias", "strang_order"})
    dt = _num(s, "dt", "solver")
    if dt <= 0:
        raise ConfigError("solver.dt", f"must be positive, got {dt}")
    t_end = _num(s, "t_end", "solver")
    if t_end < dt:
        raise ConfigError("solver.t_end", f"must be >= dt, got {t_end}")
    integrator = s["integrator"]
    if integrator not in ("strang", "rk4"):
        raise ConfigError("solver.integrator", f"must be 'strang' or 'rk4', got {integrator!r}")
    strang_order = s.get("strang_order", "lnl")
    if strang_order not in ("lnl", "nln"):
        raise ConfigError("solver.strang_order", f"must be 'lnl' or 'nln', got {strang_order!r}")

    out = _section(doc, "outputs", set(), {"diagnostics_path", "fields_dir", "record_every"}) if "outputs" in doc else {}
    every = None
    for path, sec in (("solver", s), ("outputs", out)):
        if "record_every" in sec:
            v = _num(sec, "record_every", path, integer=True)
            if v < 1:
                raise ConfigError(f"{path}.record_every", f"must be >= 1, got {v}")
            if every is not None and v != every:
                raise ConfigError(f"{path}.record_every", "conflicts with solver.record_every")
            every = v
    use_dealias = _bool(s, "dealias", "solver", False)
    if dealias is not None:
        use_dealias = use_dealias or dealias
    solver = SolverConfig(dt, t_end, integrator, every or 1, use_dealias, strang_order)
    if integrator == "rk4" and dt >= 0.1 * grid.dx**2:
        raise ConfigError("solver.dt", f"rk4 requires dt < 0.1*dx^2 = {0.1 * grid.dx**2:.6g}")

    diagnostics_path = out.get("diagnostics_path", "diagnostics.csv")
    fields_dir = out.get("fields_dir")
    for key, v in (("diagnostics_path", diagnostics_path), ("fields_dir", fields_dir)):
        if v is not None and (not isinstance(v, str) or not v):
            raise ConfigError(f"outputs.{key}", "must be a non-empty string")

    cfg = RunConfig(grid, params, initial, solver, diagnostics_path, fields_dir, Path(base_dir))
    cfg.initial_field()  # validates the datum against the grid before any run
    return cfg


def load_config(path, dealias: bool | None = None) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_config(doc, path.parent, dealias)


_ENSEMBLE_KEYS = {"family", "count", "seed", "A", "w", "k0", "x0", "band", "amplitude"}


def parse_ensemble(doc: Any, seed: int | None = None) -> EnsembleSpec:
    """Ensemble document; ``seed`` (e.g. from ``--seed``) overrides the file."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "ensemble must be a JSON object")
    for k in doc:
        if k not in _ENSEMBLE_KEYS:
            raise ConfigError(f"ensemble.{k}", "unknown key")
    for k in ("family", "count"):
        if k not in doc:
            raise ConfigError(f"ensemble.{k}", "missing required key")
    if seed is None and "seed" not in doc:
        raise ConfigError("ensemble.seed", "missing required key")
    kwargs: dict[str, Any] = {"family": doc["family"], "count": doc["count"], "seed": seed if seed is not None else doc["seed"]}
    for key in ("A", "w", "k0", "x0", "band"):
        if key in doc:
            v = doc[key]
            if not isinstance(v, list) or len(v) != 2:
                raise ConfigError(f"ensemble.{key}", "must be a [lo, hi] pair")
            kwargs[key] = tuple(v)
    if "amplitude" in doc:
        kwargs["amplitude"] = doc["amplitude"]
    try:
        return EnsembleSpec(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError("ensemble", str(exc)) from None


def load_ensemble(path, seed: int | None = None) -> EnsembleSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_ensemble(doc, seed)
