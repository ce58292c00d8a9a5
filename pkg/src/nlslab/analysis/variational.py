"""Lagrangian, action and center-of-mass diagnostics.

The Lagrangian of a time slice and the action of a trajectory are::

    L(u) = int (1/2)|u_x|^2 - (1/4)|u|^4 dx
    S    = int L(u(t)) dt            (trapezoid rule over records)

Neither contains the ``Im(conj(u) u_t)`` term of the usual NLS Lagrangian
density, so true NLS trajectories are generally not critical points of
``S`` and :func:`first_variation` is nonzero on them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dynamics import NlsParams, Trajectory
from ..spectral import ComplexField1D, Grid1D, derivative, integrate, l2_norm_sq, pointwise_abs_pow

__all__ = [
    "lagrangian",
    "action",
    "action_gradient_density",
    "BumpTestField",
    "first_variation",
    "first_variation_analytic",
    "VariationalReport",
    "center_of_mass_report",
    "write_variational_csv",
    "read_variational_csv",
    "BOUNDARY_MASS_TOL",
]

BOUNDARY_MASS_TOL = 1e-12


class BoundaryMarginError(ValueError):
    """Mass next to the box edge is no longer negligible."""


def lagrangian(u: ComplexField1D) -> float:
    kinetic = 0.5 * l2_norm_sq(derivative(u, 1))
    return kinetic - 0.25 * integrate(pointwise_abs_pow(u, 4))


def _uniform_times(times) -> float:
    t = np.asarray(times, dtype=float)
    if len(t) < 2:
        raise ValueError("need at least two records")
    d = np.diff(t)
    if np.max(np.abs(d - d[0])) > 1e-9 * d[0]:
        raise ValueError("records are not uniformly spaced")
    return float(d[0])


def _action_of_states(times, states) -> float:
    _uniform_times(times)
    return float(np.trapezoid([lagrangian(u) for u in states], times))


def action(trajectory: Trajectory, params: NlsParams | None = None) -> float:
    """Trapezoid-rule time integral of :func:`lagrangian` over the records."""
    return _action_of_states(trajectory.times, trajectory.states)


def action_gradient_density(u: ComplexField1D, params: NlsParams | None = None) -> ComplexField1D:
    """``g = -u_xx - |u|^2 u``.

    For any test field ``phi``,
    ``d/de L(u + e phi)|_0 = int Re(g conj(phi)) dx``.
    """
    v = u.values
    return ComplexField1D(u.grid, -derivative(u, 2).values - (v * np.conj(v)).real * v)


@dataclass(frozen=True)
class BumpTestField:
    """``amplitude * exp(-(x - xc)^2 / (2 wx^2)) * b((t - tc) / tw)``.

    ``b(s) = exp(1 - 1 / (1 - s^2))`` for ``|s| < 1`` and zero otherwise, so
    the field vanishes identically outside ``(tc - tw, tc + tw)``.
    """

    x_center: float
    x_width: float
    t_center: float
    t_half_width: float
    amplitude: complex = 1.0

    def __post_init__(self) -> None:
        if not (self.x_width > 0 and self.t_half_width > 0):
            raise ValueError("test field widths must be positive")

    def time_profile(self, t: float) -> float:
        s = (t - self.t_center) / self.t_half_width
        if abs(s) >= 1.0:
            return 0.0
        return math.exp(1.0 - 1.0 / (1.0 - s * s))

    def at(self, t: float, grid: Grid1D) -> ComplexField1D:
        margin = 0.5 * grid.length - abs(self.x_center)
        if margin <= 0 or abs(self.amplitude) * math.exp(-(margin**2) / (2 * self.x_width**2)) >= 1e-12:
            raise ValueError("test field is not negligible at the box edge")
        x = grid.nodes
        bump = np.exp(-((x - self.x_center) ** 2) / (2 * self.x_width**2))
        return ComplexField1D(grid, self.amplitude * self.time_profile(t) * bump)


def first_variation(
    trajectory: Trajectory, params: NlsParams | None, test_field: BumpTestField, epsilon: float = 1e-5
) -> float:
    """Central difference ``(S(u + e phi) - S(u - e phi)) / (2 e)``.

    The perturbed space-time field is evaluated directly; it is not
    re-solved.
    """
    if not (1e-8 <= epsilon <= 1e-2):
        raise ValueError(f"epsilon must lie in [1e-8, 1e-2], got {epsilon}")
    grid = trajectory.grid
    phis = [test_field.at(t, grid) for t in trajectory.times]
    plus = [u + phi * epsilon for u, phi in zip(trajectory.states, phis)]
    minus = [u - phi * epsilon for u, phi in zip(trajectory.states, phis)]
    times = trajectory.times
    return (_action_of_states(times, plus) - _action_of_states(times, minus)) / (2 * epsilon)


def first_variation_analytic(
    trajectory: Trajectory, params: NlsParams | None, test_field: BumpTestField
) -> float:
    """Trapezoid-in-time integral of ``int Re(g conj(phi)) dx``."""
    _uniform_times(trajectory.times)
    grid = trajectory.grid
    vals = []
    for t, u in zip(trajectory.times, trajectory.states):
        g = action_gradient_density(u, params).values
        phi = test_field.at(t, grid).values
        vals.append(grid.dx * float(np.sum((g * np.conj(phi)).real)))
    return float(np.trapezoid(vals, trajectory.times))


@dataclass(frozen=True, eq=False)
class VariationalReport:
    """Center-of-mass motion and both sides of the Newton-type relation.

    ``eq32_lhs`` (mass times center-of-mass acceleration) and ``eq32_rhs``
    (``-(1/4) int |u|^4``) live on the interior records ``interior_times``.
    """

    action: float
    times: np.ndarray = field(repr=False)
    xcm: np.ndarray = field(repr=False)
    interior_times: np.ndarray = field(repr=False)
    eq32_lhs: np.ndarray = field(repr=False)
    eq32_rhs: np.ndarray = field(repr=False)
    xcm_accel_max: float = 0.0
    xcm_slope: float = 0.0
    mass: float = 0.0

    @property
    def eq32_residual_max(self) -> float:
        return float(np.max(np.abs(self.eq32_lhs - self.eq32_rhs)))


def _boundary_mass(u: ComplexField1D) -> float:
    a = np.abs(u.values)
    return float(u.grid.dx * (a[0] ** 2 + a[-1] ** 2))


def center_of_mass_report(trajectory: Trajectory, params: NlsParams | None = None) -> VariationalReport:
    """Center of mass ``int x |u|^2 dx / m`` along a localized trajectory.

    Raises if fewer than five records are given, if the mass vanishes, or if
    the mass on the two edge nodes exceeds ``1e-12`` at any record.
    """
    if len(trajectory) < 5:
        raise ValueError("center_of_mass_report needs at least five records")
    h = _uniform_times(trajectory.times)
    grid = trajectory.grid
    x = grid.nodes
    masses, xcm, quartic = [], [], []
    for t, u in zip(trajectory.times, trajectory.states):
        rho = pointwise_abs_pow(u, 2).values
        m = grid.dx * float(np.sum(rho))
        if m < 1e-14:
            raise ValueError(f"mass {m:.3g} below 1e-14 at t={t}")
        edge = _boundary_mass(u)
        if edge > BOUNDARY_MASS_TOL:
            raise BoundaryMarginError(f"edge mass {edge:.3g} exceeds {BOUNDARY_MASS_TOL} at t={t}")
        masses.append(m)
        xcm.append(grid.dx * float(np.sum(x * rho)) / m)
        quartic.append(integrate(pointwise_abs_pow(u, 4)))
    masses = np.array(masses)
    xcm = np.array(xcm)
    accel = (xcm[2:] - 2 * xcm[1:-1] + xcm[:-2]) / (h * h)
    lhs = masses[1:-1] * accel
    rhs = -0.25 * np.array(quartic[1:-1])
    slope = float(np.polyfit(trajectory.times, xcm, 1)[0])
    return VariationalReport(
        action=action(trajectory, params),
        times=trajectory.times.copy(),
        xcm=xcm,
        interior_times=trajectory.times[1:-1].copy(),
        eq32_lhs=lhs,
        eq32_rhs=rhs,
        xcm_accel_max=float(np.max(np.abs(lhs))),
        xcm_slope=slope,
        mass=float(masses[0]),
    )


VARIATIONAL_HEADER = ("t", "xcm", "eq32_lhs", "eq32_rhs")


def write_variational_csv(path, report: VariationalReport) -> None:
    """Interior records only: the second difference needs both neighbours."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(VARIATIONAL_HEADER)
        for t, xc, lhs, rhs in zip(report.interior_times, report.xcm[1:-1], report.eq32_lhs, report.eq32_rhs):
            w.writerow([format(float(v), ".17g") for v in (t, xc, lhs, rhs)])


def read_variational_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != VARIATIONAL_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        data = np.array([[float(c) for c in row] for row in reader if row], dtype=float).reshape(-1, 4)
    return {name: data[:, i] for i, name in enumerate(VARIATIONAL_HEADER)}
