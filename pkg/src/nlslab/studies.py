"""Refinement studies: time-step convergence and continuity-residual order."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Literal

import numpy as np

from .conservation import fit_continuity_coefficient
from .dynamics import NlsParams, SolverConfig, evolve
from .parallel import ordered_map
from .spectral import ComplexField1D

__all__ = ["ConvergenceStudy", "convergence_study", "ContinuityStudy", "continuity_refinement", "fitted_order"]


def fitted_order(steps, errors) -> float:
    """Least-squares slope of ``log2(error)`` against ``log2(step)``."""
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(steps) < 2 or np.any(errors <= 0):
        return float("nan")
    return float(np.polyfit(np.log2(steps), np.log2(errors), 1)[0])


@dataclass(frozen=True)
class ConvergenceStudy:
    reference: Literal["exact", "self"]
    dts: tuple[float, ...]
    errors: tuple[float, ...]
    ratios: tuple[float, ...]
    order: float

    def rows(self):
        """``(dt, error, local order)``; the first row has no local order."""
        local = (float("nan"),) + tuple(math.log2(r) if r > 0 else float("nan") for r in self.ratios)
        return list(zip(self.dts, self.errors, local))


def convergence_study(
    u0: ComplexField1D,
    params: NlsParams,
    config: SolverConfig,
    halvings: int,
    exact: Callable[[float], ComplexField1D] | None = None,
    workers: int | None = None,
) -> ConvergenceStudy:
    """Run ``u0`` to ``t_end`` at ``dt, dt/2, ..., dt/2**halvings``.

    With ``exact`` the error at each level is the max pointwise deviation
    from the closed form at the final time.  Without it, the error of level
    ``i`` is ``max|u_i - u_{i+1}|`` (self-convergence), which cancels
    spatial and box-truncation error and yields ``halvings`` errors.
    """
    if halvings < 1:
        raise ValueError(f"halvings must be >= 1, got {halvings}")
    dts = [config.dt / 2**i for i in range(halvings + 1)]
    cfgs = [replace(config, dt=dt, record_every=10**12) for dt in dts]
    finals = ordered_map(lambda c: evolve(u0, params, c).final, cfgs, workers)
    if exact is not None:
        ref_state = exact(cfgs[0].n_steps * cfgs[0].dt)
        errors = [float(np.max(np.abs(u.values - ref_state.values))) for u in finals]
        used = dts
        reference = "exact"
    else:
        errors = [float(np.max(np.abs(finals[i].values - finals[i + 1].values))) for i in range(halvings)]
        used = dts[:-1]
        reference = "self"
    ratios = tuple(errors[i] / errors[i + 1] if errors[i + 1] > 0 else float("inf") for i in range(len(errors) - 1))
    return ConvergenceStudy(reference, tuple(used), tuple(errors), ratios, fitted_order(used, errors))


@dataclass(frozen=True)
class ContinuityStudy:
    dts: tuple[float, ...]
    c_fit: tuple[float, ...]
    residual_c2: tuple[float, ...]
    residual_c1: tuple[float, ...]
    flux_derivative: tuple[float, ...]
    order_c2: float
    order_c1: float


def continuity_refinement(
    u0: ComplexField1D,
    params: NlsParams,
    config: SolverConfig,
    levels: int = 3,
    workers: int | None = None,
) -> ContinuityStudy:
    """Joint refinement: halve ``dt`` while keeping ``record_every``.

    The record spacing therefore halves with the step, and the central
    time difference and the splitting error shrink together.
    """
    cfgs = [replace(config, dt=config.dt / 2**i) for i in range(levels)]
    reports = ordered_map(lambda c: fit_continuity_coefficient(evolve(u0, params, c), params), cfgs, workers)
    dts = tuple(c.dt for c in cfgs)
    r2 = tuple(r.mass_residual_c2 for r in reports)
    r1 = tuple(r.mass_residual_c1 for r in reports)
    return ContinuityStudy(
        dts,
        tuple(r.c_fit for r in reports),
        r2,
        r1,
        tuple(r.flux_derivative_l2 for r in reports),
        fitted_order(dts, r2),
        fitted_order(dts, r1),
    )
