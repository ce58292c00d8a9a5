"""One-dimensional cubic NLS simulation and verification laboratory."""

from .dynamics import NlsParams, SolverConfig, Trajectory, evolve
from .spectral import ComplexField1D, Grid1D, RealField1D, make_grid

__version__ = "0.1.0"

__all__ = [
    "ComplexField1D",
    "Grid1D",
    "NlsParams",
    "RealField1D",
    "SolverConfig",
    "Trajectory",
    "evolve",
    "make_grid",
]
