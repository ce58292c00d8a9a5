"""Conservation-law tensor, local continuity residuals and integrated invariants.

At one space dimension the tensor has three components::

    f00 = |u|^2
    f10 = Im(u_x conj(u))
    f11 = |u_x|^2 - (1/4) (|u|^2)_xx + lam (p-1)/(p+1) |u|^(p+1)

For ``i u_t + u_xx = sigma |u|^2 u`` the exact local mass law is
``d/dt f00 + 2 d/dx f10 = 0``; the flux coefficient ``c`` is therefore kept
as a parameter of the residuals and can be fitted from data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .dynamics import NlsParams, Trajectory, nls_rhs
from .spectral import (
    ComplexField1D,
    RealField1D,
    derivative,
    im_product,
    integrate,
    pointwise_abs_pow,
)

__all__ = [
    "TensorSnapshot",
    "ConservedQuantities",
    "DriftReport",
    "ContinuityReport",
    "DegenerateFitError",
    "f00",
    "f10",
    "f11",
    "tensor_snapshot",
    "conserved_quantities",
    "invariant_drift",
    "continuity_residual",
    "continuity_residual_analytic",
    "residual_norm",
    "fit_continuity_coefficient",
    "write_diagnostics",
    "read_diagnostics",
    "DRIFT_FLOOR",
]

DRIFT_FLOOR = 1e-14


class DegenerateFitError(ValueError):
    """The flux derivative vanishes, so the continuity coefficient is undefined."""


@dataclass(frozen=True, eq=False)
class TensorSnapshot:
    t: float
    f00: RealField1D
    f10: RealField1D
    f11: RealField1D


@dataclass(frozen=True)
class ConservedQuantities:
    """Integrated quantities of one time slice.

    ``energy`` is the Hamiltonian the evolution conserves,
    ``kinetic + sigma/(p+1) * int |u|^(p+1)``; ``potential`` is the separate
    ``2 lam/(p+1) * int |u|^(p+1)`` and is not folded into ``energy``.
    ``lagrangian`` is ``kinetic - (1/4) int |u|^4``.
    """

    t: float
    mass: float
    momentum: float
    kinetic: float
    potential: float
    energy: float
    lagrangian: float


@dataclass(frozen=True)
class DriftReport:
    quantities: tuple[ConservedQuantities, ...]
    mass: float
    momentum: float
    energy: float


@dataclass(frozen=True)
class ContinuityReport:
    c_fit: float
    mass_residual_l2: float
    momentum_residual_l2: float
    refinement_order: float
    mass_residual_c1: float
    mass_residual_c2: float
    flux_derivative_l2: float


# -- tensor components --------------------------------------------------------


def f00(u: ComplexField1D) -> RealField1D:
    return pointwise_abs_pow(u, 2)


def f10(u: ComplexField1D) -> RealField1D:
    return im_product(derivative(u, 1), u)


def _f11_values(u: ComplexField1D, lam: float, p: int) -> np.ndarray:
    ux = derivative(u, 1).values
    rho = f00(u)
    rho_xx = derivative(rho, 2).values
    return (ux * np.conj(ux)).real - 0.25 * rho_xx + lam * (p - 1) / (p + 1) * np.abs(u.values) ** (p + 1)


def f11(u: ComplexField1D, params: NlsParams) -> RealField1D:
    return RealField1D(u.grid, _f11_values(u, params.lam, params.p))


def tensor_snapshot(u: ComplexField1D, params: NlsParams, t: float = 0.0) -> TensorSnapshot:
    return TensorSnapshot(t, f00(u), f10(u), f11(u, params))


# -- integrated invariants ----------------------------------------------------


def conserved_quantities(u: ComplexField1D, params: NlsParams, t: float = 0.0) -> ConservedQuantities:
    p = params.p
    ux = derivative(u, 1)
    mass = integrate(f00(u))
    momentum = -integrate(f10(u))
    kinetic = 0.5 * integrate(pointwise_abs_pow(ux, 2))
    moment_p1 = integrate(pointwise_abs_pow(u, p + 1))
    quartic = moment_p1 if p == 3 else integrate(pointwise_abs_pow(u, 4))
    potential = 2.0 * params.lam / (p + 1) * moment_p1
    energy = kinetic + params.coupling / (p + 1) * moment_p1
    lagrangian = kinetic - 0.25 * quartic
    return ConservedQuantities(t, mass, momentum, kinetic, potential, energy, lagrangian)


def _relative_drift(values: np.ndarray) -> float:
    ref = values[0]
    return float(np.max(np.abs(values - ref)) / max(abs(ref), DRIFT_FLOOR))


def invariant_drift(trajectory: Trajectory, params: NlsParams | None = None) -> DriftReport:
    """Per-record invariants and the maximal relative drift of mass, momentum, energy.

    Drift is ``max_t |Q(t) - Q(0)| / max(|Q(0)|, 1e-14)``.
    """
    params = params or trajectory.params
    qs = tuple(conserved_quantities(u, params, t) for t, u in zip(trajectory.times, trajectory.states))
    col = lambda name: np.array([getattr(q, name) for q in qs])  # noqa: E731
    return DriftReport(qs, _relative_drift(col("mass")), _relative_drift(col("momentum")), _relative_drift(col("energy")))


# -- continuity residuals -----------------------------------------------------


def residual_norm(r: RealField1D) -> float:
    """Spatial L2 norm ``sqrt(int r^2 dx)``."""
    return math.sqrt(integrate(RealField1D(r.grid, r.values**2)))


def _check_uniform(times, rtol: float = 1e-9) -> float:
    t = np.asarray(times, dtype=float)
    h1, h2 = t[1] - t[0], t[2] - t[1]
    if h1 <= 0 or abs(h2 - h1) > rtol * h1:
        raise ValueError(f"records are not equally spaced: {t}")
    return float(h1)


def continuity_residual(
    states, times, params: NlsParams, c: float
) -> tuple[RealField1D, RealField1D]:
    """Residuals of the local mass and momentum laws at the middle record.

    Time derivatives are central differences of the three records
    ``(u(t-h), u(t), u(t+h))``; space derivatives are spectral.
    """
    if len(states) != 3 or len(times) != 3:
        raise ValueError("continuity_residual needs exactly three records")
    h = _check_uniform(times)
    before, mid, after = states
    grid = mid.grid
    dt_f00 = (f00(after).values - f00(before).values) / (2 * h)
    dt_f10 = (f10(after).values - f10(before).values) / (2 * h)
    dx_f10 = derivative(f10(mid), 1).values
    dx_f11 = derivative(f11(mid, params), 1).values
    return RealField1D(grid, dt_f00 + c * dx_f10), RealField1D(grid, dt_f10 + c * dx_f11)


def continuity_residual_analytic(
    u: ComplexField1D, params: NlsParams, c: float
) -> tuple[RealField1D, RealField1D]:
    """Same residuals with ``u_t`` taken from the equation instead of snapshots.

    Isolates the spatial discretization from the time stepping.
    """
    grid = u.grid
    ut = nls_rhs(u, params).values
    v = u.values
    ux = derivative(u, 1).values
    utx = derivative(ComplexField1D(grid, ut), 1).values
    dt_f00 = 2.0 * (np.conj(v) * ut).real
    dt_f10 = (utx * np.conj(v) + ux * np.conj(ut)).imag
    dx_f10 = derivative(f10(u), 1).values
    dx_f11 = derivative(f11(u, params), 1).values
    return RealField1D(grid, dt_f00 + c * dx_f10), RealField1D(grid, dt_f10 + c * dx_f11)


def _interior_terms(trajectory: Trajectory, stride: int, params: NlsParams):
    """Central-difference ``d/dt f00`` and spectral ``d/dx f10`` at interior records."""
    times = trajectory.times[::stride]
    states = trajectory.states[::stride]
    if len(times) < 3:
        raise ValueError("need at least three uniformly spaced records")
    h = float(times[1] - times[0])
    d = np.diff(times)
    if np.max(np.abs(d - h)) > 1e-9 * h:
        raise ValueError("records are not uniformly spaced")
    rho = [f00(u).values for u in states]
    flux = [f10(u) for u in states]
    dt_rho = [(rho[i + 1] - rho[i - 1]) / (2 * h) for i in range(1, len(states) - 1)]
    dx_flux = [derivative(flux[i], 1).values for i in range(1, len(states) - 1)]
    return np.array(dt_rho), np.array(dx_flux), h


def _rms_l2(rows: np.ndarray, dx: float) -> float:
    """Root mean square over records of the spatial L2 norm."""
    return float(math.sqrt(np.mean(dx * np.sum(rows**2, axis=1))))


def fit_continuity_coefficient(trajectory: Trajectory, params: NlsParams | None = None) -> ContinuityReport:
    """Least-squares flux coefficient of the local mass law.

    ``c_fit = -<d_t f00, d_x f10> / ||d_x f10||^2`` accumulated over all
    interior records.  The refinement order compares the mass residual at
    ``c_fit`` for record spacing ``h`` against spacing ``2h`` (every other
    record); it is NaN when fewer than five records are available.
    """
    params = params or trajectory.params
    grid = trajectory.grid
    dx = grid.dx
    dt_rho, dx_flux, _ = _interior_terms(trajectory, 1, params)
    denom = float(np.sum(dx_flux * dx_flux)) * dx
    if denom < 1e-14:
        raise DegenerateFitError(f"flux derivative norm^2 = {denom:.3g} < 1e-14; c_fit undefined")
    c_fit = -float(np.sum(dt_rho * dx_flux)) * dx / denom

    mass_res = _rms_l2(dt_rho + c_fit * dx_flux, dx)
    res_c1 = _rms_l2(dt_rho + dx_flux, dx)
    res_c2 = _rms_l2(dt_rho + 2.0 * dx_flux, dx)

    mom_rows = []
    for i in range(1, len(trajectory) - 1):
        _, r = continuity_residual(trajectory.states[i - 1 : i + 2], trajectory.times[i - 1 : i + 2], params, c_fit)
        mom_rows.append(r.values)
    mom_res = _rms_l2(np.array(mom_rows), dx)

    order = float("nan")
    if len(trajectory) >= 5:
        coarse_rho, coarse_flux, _ = _interior_terms(trajectory, 2, params)
        coarse = _rms_l2(coarse_rho + c_fit * coarse_flux, dx)
        if mass_res > 0 and coarse > 0:
            order = math.log2(coarse / mass_res)
    flux_l2 = math.sqrt(denom / len(dx_flux))
    return ContinuityReport(c_fit, mass_res, mom_res, order, res_c1, res_c2, flux_l2)


# -- diagnostics CSV ----------------------------------------------------------

DIAGNOSTICS_HEADER = ("t", "mass", "momentum", "kinetic", "potential", "energy", "lagrangian")


def write_diagnostics(path, quantities) -> None:
    """One row per record, every float with 17 significant digits."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGNOSTICS_HEADER)
        for q in quantities:
            w.writerow([format(getattr(q, name), ".17g") for name in DIAGNOSTICS_HEADER])


def read_diagnostics(path) -> list[ConservedQuantities]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != DIAGNOSTICS_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        names = [f.name for f in fields(ConservedQuantities)]
        return [ConservedQuantities(**{n: float(row[n]) for n in names}) for row in reader]
