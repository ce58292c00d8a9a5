"""Empirical local smoothing constant in one dimension.

For a solution ``u`` the harness measures::

    lhs   = | int_0^T Im(u_x conj(u))(t, x0) dt |
    grad  = || d/dx u0 ||^2_{L2}
    ratio = lhs / grad

and takes the largest ratio over an ensemble of initial data as the
empirical constant.  The time integral is truncated at ``T = t_end``.  Each
member also reports the periodic Poincaré pair
``||u0 - mean(u0)||^2 <= (L / 2 pi)^2 ||d/dx u0||^2``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from ..dynamics import NlsParams, SolverConfig, SolverError, evolve, gaussian_packet
from ..parallel import ordered_map
from ..spectral import ComplexField1D, Grid1D, derivative, im_product, l2_norm_sq

__all__ = [
    "SmoothingReport",
    "EnsembleSpec",
    "EnsembleMember",
    "EnsembleResult",
    "EnsembleError",
    "smoothing_density",
    "smoothing_report",
    "ensemble_members",
    "empirical_constant",
    "write_smoothing_csv",
    "read_smoothing_csv",
    "DEGENERATE_GRAD",
]

DEGENERATE_GRAD = 1e-14


class EnsembleError(RuntimeError):
    def __init__(self, member_id: int, cause: Exception):
        super().__init__(f"ensemble member {member_id} failed: {cause}")
        self.member_id = member_id
        self.cause = cause


@dataclass(frozen=True)
class SmoothingReport:
    x0: float
    t_end: float
    lhs: float
    grad_norm_sq: float
    ratio: float
    poincare_lhs: float
    poincare_rhs: float

    @property
    def degenerate(self) -> bool:
        return not (self.grad_norm_sq > DEGENERATE_GRAD)

    @property
    def poincare_ok(self) -> bool:
        # relative slack covers roundoff when u0 is a single Fourier mode
        return self.poincare_lhs <= self.poincare_rhs * (1 + 1e-12) + 1e-300


def smoothing_density(u: ComplexField1D, x0: float = 0.0) -> float:
    """``Im(u_x conj(u))`` at the node nearest ``x0`` (at most ``dx/2`` away)."""
    i = u.grid.nearest_node(x0)
    return float(im_product(derivative(u, 1), u).values[i])


def _poincare_pair(u0: ComplexField1D, grad_norm_sq: float) -> tuple[float, float]:
    v = u0.values - np.mean(u0.values)
    lhs = l2_norm_sq(ComplexField1D(u0.grid, v))
    rhs = (u0.grid.length / (2 * np.pi)) ** 2 * grad_norm_sq
    return lhs, rhs


def smoothing_report(
    u0: ComplexField1D, params: NlsParams, config: SolverConfig, x0: float = 0.0
) -> SmoothingReport:
    """Evolve ``u0`` and integrate the density at ``x0`` by the trapezoid rule.

    The gradient norm is evaluated on the initial datum.  ``ratio`` is NaN
    when that norm is below ``1e-14``.
    """
    traj = evolve(u0, params, config)
    density = np.array([smoothing_density(u, x0) for u in traj.states])
    lhs = abs(float(np.trapezoid(density, traj.times)))
    grad = l2_norm_sq(derivative(u0, 1))
    ratio = lhs / grad if grad > DEGENERATE_GRAD else float("nan")
    p_lhs, p_rhs = _poincare_pair(u0, grad)
    return SmoothingReport(float(x0), float(traj.times[-1]), lhs, grad, ratio, p_lhs, p_rhs)


# -- ensembles ----------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleSpec:
    """Initial-data family for the smoothing harness.

    ``gaussian_grid_scan`` draws ``count`` Gaussian packets as a seeded Latin
    hypercube over the ``A``, ``w``, ``k0`` and centre ranges: each range is
    cut into ``count`` strata and every stratum is used exactly once per
    parameter.  ``random_bandlimited`` draws periodic fields whose Fourier
    modes ``band[0] <= |j| <= band[1]`` carry seeded complex normal
    coefficients, rescaled to peak modulus ``amplitude``.
    """

    family: Literal["gaussian_grid_scan", "random_bandlimited"]
    count: int
    seed: int
    A: tuple[float, float] = (0.5, 2.0)
    w: tuple[float, float] = (0.5, 2.0)
    k0: tuple[float, float] = (-4.0, 4.0)
    x0: tuple[float, float] = (-4.0, 4.0)
    band: tuple[int, int] = (1, 8)
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in ("gaussian_grid_scan", "random_bandlimited"):
            raise ValueError(f"unknown ensemble family {self.family!r}")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"count must be a positive integer, got {self.count}")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        for name in ("A", "w", "k0", "x0"):
            lo, hi = getattr(self, name)
            if not (lo <= hi):
                raise ValueError(f"range {name} must satisfy lo <= hi, got {(lo, hi)}")
        lo, hi = self.band
        if not (1 <= lo <= hi):
            raise ValueError(f"band must satisfy 1 <= lo <= hi, got {self.band}")


@dataclass(frozen=True, eq=False)
class EnsembleMember:
    member_id: int
    family: str
    A: float
    w: float
    k0: float
    x0: float
    u0: ComplexField1D = field(repr=False)


def _latin(rng: np.random.Generator, count: int, lo: float, hi: float) -> np.ndarray:
    strata = (rng.permutation(count) + rng.random(count)) / count
    return lo + (hi - lo) * strata


def ensemble_members(spec: EnsembleSpec, grid: Grid1D) -> list[EnsembleMember]:
    """Deterministic list of members for ``spec`` on ``grid``."""
    rng = np.random.default_rng(spec.seed)
    members = []
    if spec.family == "gaussian_grid_scan":
        cols = [_latin(rng, spec.count, *getattr(spec, name)) for name in ("A", "w", "k0", "x0")]
        for i, (A, w, k0, xc) in enumerate(zip(*cols)):
            u0 = gaussian_packet(float(A), float(xc), float(k0), float(w), grid)
            members.append(EnsembleMember(i, spec.family, float(A), float(w), float(k0), float(xc), u0))
        return members

    lo, hi = spec.band
    if hi >= grid.n // 2:
        raise ValueError(f"band upper edge {hi} must be below n/2 = {grid.n // 2}")
    j = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    active = (np.abs(j) >= lo) & (np.abs(j) <= hi)
    for i in range(spec.count):
        coeffs = np.zeros(grid.n, dtype=complex)
        k = int(active.sum())
        coeffs[active] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        v = np.fft.ifft(coeffs)
        peak = np.max(np.abs(v))
        v = v * (spec.amplitude / peak) if peak > 0 else v
        nan = float("nan")
        members.append(EnsembleMember(i, spec.family, float(spec.amplitude), nan, nan, nan, ComplexField1D(grid, v)))
    return members


@dataclass(frozen=True)
class EnsembleResult:
    constant: float
    rows: tuple[dict, ...]
    excluded: tuple[int, ...]


def empirical_constant(
    spec: EnsembleSpec,
    grid: Grid1D,
    params: NlsParams,
    config: SolverConfig,
    x0: float = 0.0,
    workers: int | None = None,
) -> EnsembleResult:
    """Largest smoothing ratio over the ensemble.

    Members with a degenerate gradient norm are excluded with a warning; if
    every member is degenerate the constant is NaN.  Rows come back in
    member order whatever the worker count.
    """
    members = ensemble_members(spec, grid)

    def run(member: EnsembleMember):
        try:
            return smoothing_report(member.u0, params, config, x0)
        except SolverError as exc:
            raise EnsembleError(member.member_id, exc) from exc

    reports = ordered_map(run, members, workers)
    rows, excluded, ratios = [], [], []
    for m, r in zip(members, reports):
        rows.append(
            {
                "member_id": m.member_id,
                "family": m.family,
                "A": m.A,
                "w": m.w,
                "k0": m.k0,
                "x0": m.x0,
                "lhs": r.lhs,
                "grad_norm_sq": r.grad_norm_sq,
                "ratio": r.ratio,
                "poincare_lhs": r.poincare_lhs,
                "poincare_rhs": r.poincare_rhs,
            }
        )
        if r.degenerate:
            excluded.append(m.member_id)
        else:
            ratios.append(r.ratio)
    if excluded:
        warnings.warn(f"degenerate members excluded: {excluded}", RuntimeWarning, stacklevel=2)
    constant = max(ratios) if ratios else float("nan")
    return EnsembleResult(constant, tuple(rows), tuple(excluded))


SMOOTHING_HEADER = (
    "member_id",
    "family",
    "A",
    "w",
    "k0",
    "x0",
    "lhs",
    "grad_norm_sq",
    "ratio",
    "poincare_lhs",
    "poincare_rhs",
)


def write_smoothing_csv(path, rows) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SMOOTHING_HEADER)
        for row in rows:
            out = []
            for key in SMOOTHING_HEADER:
                v = row[key]
                out.append(format(v, ".17g") if isinstance(v, float) else str(v))
            w.writerow(out)


def read_smoothing_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SMOOTHING_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        rows = []
        for raw in reader:
            row = {k: float(v) for k, v in raw.items() if k not in ("member_id", "family")}
            row["member_id"] = int(raw["member_id"])
            row["family"] = raw["family"]
            rows.append(row)
    return rows
