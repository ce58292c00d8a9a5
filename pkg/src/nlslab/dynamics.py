"""Time evolution of the one-dimensional cubic NLS and exact initial data.

The evolved equation is::

    i u_t + u_xx = sigma |u|^(p-1) u,     u(0, x) = u0(x)

on the periodic box of a :class:`~nlslab.spectral.Grid1D`.  ``sigma = +1``
is the defocusing equation; ``sigma = -1`` is its focusing counterpart, which
supports the bright soliton used as an exact oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .spectral import ComplexField1D, Grid1D, dealias_mask

__all__ = [
    "NlsParams",
    "SolverConfig",
    "Trajectory",
    "SolverError",
    "StabilityError",
    "nls_rhs",
    "step_strang",
    "step_rk4",
    "evolve",
    "plane_wave",
    "plane_wave_frequency",
    "bright_soliton",
    "gaussian_packet",
    "galilean_boost",
    "RK4_SAFETY",
]

RK4_SAFETY = 0.1


class SolverError(RuntimeError):
    """Raised when the evolved field stops being finite."""

    def __init__(self, message: str, last_good_time: float):
        super().__init__(message)
        self.last_good_time = last_good_time


class StabilityError(ValueError):
    """RK4 time step violates ``dt < RK4_SAFETY * dx**2``."""


@dataclass(frozen=True)
class NlsParams:
    """Equation parameters.

    ``lam`` is the coefficient written in the momentum-flux tensor and the
    potential energy; it does not enter the evolution, which keeps a unit
    nonlinear coefficient.  ``linear=True`` switches the nonlinear term off
    (free Schrödinger flow) without touching any other code path.
    """

    sigma: int = 1
    lam: float = 1.0
    p: int = 3
    linear: bool = False

    def __post_init__(self) -> None:
        if self.sigma not in (1, -1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma}")
        if not (self.lam >= 1):
            raise ValueError(f"lambda must be >= 1, got {self.lam}")
        if int(self.p) != self.p or self.p < 3 or self.p % 2 != 1:
            raise ValueError(f"p must be an odd integer >= 3, got {self.p}")

    @property
    def coupling(self) -> float:
        """Effective coefficient of ``|u|^(p-1) u`` in the evolution."""
        return 0.0 if self.linear else float(self.sigma)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    integrator: Literal["strang", "rk4"] = "strang"
    record_every: int = 1
    dealias: bool = False
    strang_order: Literal["lnl", "nln"] = "lnl"

    def __post_init__(self) -> None:
        if not (self.dt > 0) or not math.isfinite(self.dt):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_end >= self.dt) or not math.isfinite(self.t_end):
            raise ValueError(f"t_end must be >= dt, got t_end={self.t_end}, dt={self.dt}")
        if self.integrator not in ("strang", "rk4"):
            raise ValueError(f"integrator must be 'strang' or 'rk4', got {self.integrator!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every}")
        _check_order(self.strang_order)

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: Grid1D
    params: NlsParams
    times: np.ndarray = field(repr=False)
    states: tuple[ComplexField1D, ...] = field(repr=False)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        if len(times) != len(self.states) or len(times) == 0:
            raise ValueError("times and states must be non-empty and equally long")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ValueError("times must start at 0 and increase strictly")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> ComplexField1D:
        return self.states[-1]

    def record_spacing(self, rtol: float = 1e-9) -> float:
        """Common spacing of the records; raises if they are not uniform."""
        if len(self.times) < 2:
            raise ValueError("need at least two records")
        d = np.diff(self.times)
        if np.max(np.abs(d - d[0])) > rtol * d[0]:
            raise ValueError("records are not uniformly spaced")
        return float(d[0])


# -- right-hand side and steppers ---------------------------------------------


def _nonlinear_factor(u: np.ndarray, params: NlsParams) -> np.ndarray:
    a2 = (u * np.conj(u)).real
    return a2 if params.p == 3 else a2 ** ((params.p - 1) // 2)


def _rhs(u: np.ndarray, grid: Grid1D, params: NlsParams, mask=None) -> np.ndarray:
    k2 = grid.wavenumbers**2
    lin = -1j * np.fft.ifft(k2 * np.fft.fft(u))
    if params.coupling == 0.0:
        return lin
    nl = -1j * params.coupling * _nonlinear_factor(u, params) * u
    if mask is not None:
        nl = np.fft.ifft(mask * np.fft.fft(nl))
    return lin + nl


def nls_rhs(u: ComplexField1D, params: NlsParams) -> ComplexField1D:
    """``u_t = i u_xx - i sigma |u|^(p-1) u``."""
    return ComplexField1D(u.grid, _rhs(u.values, u.grid, params))


def _linear_flow(u, phase, mask):
    uh = np.fft.fft(u) * phase
    if mask is not None:
        uh = uh * mask
    return np.fft.ifft(uh)


def _rotate(u, tau, params):
    # exact solution of i u_t = g |u|^(p-1) u over time tau; |u| is invariant
    return u * np.exp((-1j * params.coupling * tau) * _nonlinear_factor(u, params))


def _strang(u, dt, params, phases, order="lnl", mask=None):
    linear = params.coupling == 0.0
    if order == "lnl":
        half = phases[0]
        u = _linear_flow(u, half, mask)
        if not linear:
            u = _rotate(u, dt, params)
        return _linear_flow(u, half, mask)
    if not linear:
        u = _rotate(u, 0.5 * dt, params)
    u = _linear_flow(u, phases[1], mask)
    if not linear:
        u = _rotate(u, 0.5 * dt, params)
    return u


def _linear_phases(grid: Grid1D, dt: float):
    k2 = grid.wavenumbers**2
    return np.exp(-0.5j * k2 * dt), np.exp(-1j * k2 * dt)


def _rk4(u, grid, dt, params, mask=None):
    k1 = _rhs(u, grid, params, mask)
    k2 = _rhs(u + 0.5 * dt * k1, grid, params, mask)
    k3 = _rhs(u + 0.5 * dt * k2, grid, params, mask)
    k4 = _rhs(u + dt * k3, grid, params, mask)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_order(order: str) -> None:
    if order not in ("lnl", "nln"):
        raise ValueError(f"strang order must be 'lnl' or 'nln', got {order!r}")


def _check_rk4_dt(dt: float, grid: Grid1D) -> None:
    limit = RK4_SAFETY * grid.dx**2
    if dt >= limit and dt > 0:
        raise StabilityError(f"rk4 requires dt < {RK4_SAFETY}*dx^2 = {limit:.6g}, got dt={dt:.6g}")


def step_strang(
    u: ComplexField1D,
    dt: float,
    params: NlsParams,
    dealias: bool = False,
    order: Literal["lnl", "nln"] = "lnl",
) -> ComplexField1D:
    """One Strang step.

    ``order="lnl"`` (default) is half linear flow, full nonlinear rotation,
    half linear flow; ``"nln"`` is half rotation, full linear flow, half
    rotation.  Every substep is solved exactly, so the discrete L2 norm is
    preserved to roundoff for either ordering.  The linear-first ordering has
    the smaller error constant on soliton data (about 0.89 vs 1.27 in
    ``max|err| / (t dt^2)`` for the ``a = 1`` soliton).
    """
    _check_order(order)
    grid = u.grid
    mask = dealias_mask(grid) if dealias else None
    return ComplexField1D(grid, _strang(u.values, dt, params, _linear_phases(grid, dt), order, mask))


def step_rk4(
    u: ComplexField1D, dt: float, params: NlsParams, dealias: bool = False
) -> ComplexField1D:
    """Classical four-stage Runge-Kutta step on :func:`nls_rhs`."""
    grid = u.grid
    _check_rk4_dt(dt, grid)
    mask = dealias_mask(grid) if dealias else None
    return ComplexField1D(grid, _rk4(u.values, grid, dt, params, mask))


def evolve(u0: ComplexField1D, params: NlsParams, config: SolverConfig) -> Trajectory:
    """Step ``u0`` to ``config.t_end``.

    States are recorded at ``t = 0``, every ``record_every`` steps, and at
    the final step.  Raises :class:`SolverError` as soon as a sample becomes
    non-finite, carrying the last time at which the field was finite.
    """
    grid = u0.grid
    dt = config.dt
    n_steps = config.n_steps
    mask = dealias_mask(grid) if config.dealias else None
    if config.integrator == "rk4":
        _check_rk4_dt(dt, grid)
        phases = None
    else:
        phases = _linear_phases(grid, dt)

    u = np.array(u0.values)
    times = [0.0]
    states = [u0]
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            if phases is not None:
                u = _strang(u, dt, params, phases, config.strang_order, mask)
            else:
                u = _rk4(u, grid, dt, params, mask)
            if not np.all(np.isfinite(u)):
                raise SolverError(
                    f"non-finite field at step {step} (t={step * dt:.17g})",
                    last_good_time=(step - 1) * dt,
                )
            if step % config.record_every == 0 or step == n_steps:
                times.append(step * dt)
                states.append(ComplexField1D(grid, u))
    return Trajectory(grid, params, np.array(times), tuple(states))


# -- exact and standard initial data ------------------------------------------


def plane_wave_frequency(A: float, k: float, params: NlsParams) -> float:
    """Dispersion relation ``omega = k^2 + sigma |A|^(p-1)``."""
    return k * k + params.coupling * abs(A) ** (params.p - 1)


def plane_wave(A: float, k_index: int, grid: Grid1D, params: NlsParams, t: float = 0.0) -> ComplexField1D:
    """Exact solution ``A exp(i(k x - omega t))`` with ``k = (2 pi / L) k_index``."""
    if int(k_index) != k_index or abs(k_index) >= grid.n // 2:
        raise ValueError(f"k_index must be an integer with |k_index| < n/2, got {k_index}")
    k = grid.fundamental * int(k_index)
    omega = plane_wave_frequency(A, k, params)
    x = grid.nodes
    return ComplexField1D(grid, A * np.exp(1j * (k * x - omega * t)))


def bright_soliton(
    a: float, x0: float, grid: Grid1D, t: float = 0.0, velocity: float = 0.0
) -> ComplexField1D:
    """Focusing (``sigma = -1``, ``p = 3``) soliton.

    ``sqrt(2) a sech(a (x - x0 - v t)) exp(i (v x / 2 - v^2 t / 4 + a^2 t))``;
    ``velocity = 0`` gives the standing soliton.  Positions are wrapped onto
    the periodic box.
    """
    if not (a > 0):
        raise ValueError(f"soliton amplitude a must be positive, got {a}")
    L = grid.length
    margin = 0.5 * L - abs(x0)
    if margin <= 0 or 1.0 / math.cosh(min(a * margin, 700.0)) > 1e-10:
        warnings.warn(
            f"soliton tail at the box edge exceeds 1e-10 (a={a}, x0={x0}, L={L})",
            RuntimeWarning,
            stacklevel=2,
        )
    x = grid.nodes
    centre = x0 + velocity * t
    s = (x - centre + 0.5 * L) % L - 0.5 * L
    phase = 0.5 * velocity * x - 0.25 * velocity**2 * t + a * a * t
    return ComplexField1D(grid, math.sqrt(2.0) * a / np.cosh(a * s) * np.exp(1j * phase))


def gaussian_packet(A: float, x0: float, k0: float, w: float, grid: Grid1D) -> ComplexField1D:
    """``A exp(-(x - x0)^2 / (2 w^2)) exp(i k0 x)``.

    Requires ``w >= 4 dx`` and a negligible amplitude at the box edge:
    ``|A| exp(-(L/2 - |x0|)^2 / (2 w^2)) < 1e-12``.
    """
    if not (w >= 4 * grid.dx):
        raise ValueError(f"width w={w} must be at least 4*dx={4 * grid.dx:.6g}")
    margin = 0.5 * grid.length - abs(x0)
    if margin <= 0 or abs(A) * math.exp(-(margin**2) / (2 * w * w)) >= 1e-12:
        raise ValueError(
            f"gaussian packet (A={A}, x0={x0}, w={w}) is not negligible at the box edge"
        )
    x = grid.nodes
    return ComplexField1D(grid, A * np.exp(-((x - x0) ** 2) / (2 * w * w)) * np.exp(1j * k0 * x))


def galilean_boost(u: ComplexField1D, velocity: float) -> ComplexField1D:
    """Multiply by ``exp(i v x / 2)``; the boosted field travels at speed ``v``."""
    return ComplexField1D(u.grid, u.values * np.exp(0.5j * velocity * u.grid.nodes))


def with_coupling_flipped(params: NlsParams) -> NlsParams:
    """Same parameters with the nonlinear sign reversed (mutation testing)."""
    return replace(params, sigma=-params.sigma)
