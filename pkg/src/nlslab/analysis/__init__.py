"""Smoothing-estimate harness and variational diagnostics."""

from .smoothing import (
    EnsembleMember,
    EnsembleResult,
    EnsembleSpec,
    SmoothingReport,
    empirical_constant,
    ensemble_members,
    read_smoothing_csv,
    smoothing_density,
    smoothing_report,
    write_smoothing_csv,
)
from .variational import (
    BumpTestField,
    VariationalReport,
    action,
    action_gradient_density,
    center_of_mass_report,
    first_variation,
    first_variation_analytic,
    lagrangian,
    read_variational_csv,
    write_variational_csv,
)

__all__ = [
    "EnsembleMember",
    "EnsembleResult",
    "EnsembleSpec",
    "SmoothingReport",
    "empirical_constant",
    "ensemble_members",
    "read_smoothing_csv",
    "smoothing_density",
    "smoothing_report",
    "write_smoothing_csv",
    "BumpTestField",
    "VariationalReport",
    "action",
    "action_gradient_density",
    "center_of_mass_report",
    "first_variation",
    "first_variation_analytic",
    "lagrangian",
    "read_variational_csv",
    "write_variational_csv",
]
