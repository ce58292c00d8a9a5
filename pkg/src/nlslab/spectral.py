"""Periodic one-dimensional grids and Fourier-spectral calculus.

Conventions
-----------
Nodes are ``x_i = -L/2 + i*dx`` for ``i = 0..n-1`` on the box ``[-L/2, L/2)``.
The forward transform is unnormalized (``numpy.fft.fft``) and the inverse
carries the ``1/n`` factor.  Wavenumbers are in DFT order::

    k = (2*pi/L) * [0, 1, ..., n/2-1, -n/2, ..., -1]

Spatial integrals use the periodic rectangle rule ``dx * sum(f)``, which is
exact for trigonometric polynomials below the Nyquist mode.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Grid1D",
    "ComplexField1D",
    "RealField1D",
    "make_grid",
    "dft",
    "inverse_dft",
    "derivative",
    "integrate",
    "l2_norm_sq",
    "pointwise_abs_pow",
    "im_product",
    "re_product",
    "dealias_mask",
    "write_snapshot",
    "read_snapshot",
]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[-L/2, L/2)``.

    Parameters
    ----------
    n : int
        Number of nodes; a power of two, at least 8.
    length : float
        Box length ``L``.
    """

    n: int
    length: float

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ValueError(f"n must be an integer, got {self.n!r}")
        if self.n < 8 or not _is_power_of_two(int(self.n)):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"length must be positive and finite, got {self.length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -0.5 * self.length + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = (2.0 * np.pi / self.length) * np.fft.fftfreq(self.n, d=1.0 / self.n)
        k.flags.writeable = False
        return k

    @property
    def fundamental(self) -> float:
        """Smallest nonzero wavenumber ``2*pi/L``."""
        return 2.0 * np.pi / self.length

    def nearest_node(self, x: float) -> int:
        """Index of the node nearest to ``x`` (periodically wrapped)."""
        return int(np.rint((x + 0.5 * self.length) / self.dx)) % self.n


def make_grid(n: int, length: float) -> Grid1D:
    """Build a :class:`Grid1D`, rejecting non-power-of-two ``n`` and bad lengths."""
    return Grid1D(n, length)


def _check_samples(grid: Grid1D, values, dtype) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim != 1 or arr.shape[0] != grid.n:
        raise ValueError(f"expected {grid.n} samples, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field samples must be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField1D:
    """Complex samples of a field at the nodes of ``grid``."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _check_samples(self.grid, self.values, complex))

    def conj(self) -> ComplexField1D:
        return ComplexField1D(self.grid, np.conj(self.values))

    def __add__(self, other: ComplexField1D) -> ComplexField1D:
        _same_grid(self, other)
        return ComplexField1D(self.grid, self.values + other.values)

    def __sub__(self, other: ComplexField1D) -> ComplexField1D:
        _same_grid(self, other)
        return ComplexField1D(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> ComplexField1D:
        return ComplexField1D(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class RealField1D:
    """Real samples on ``grid``; used for densities such as ``|u|^2``."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _check_samples(self.grid, self.values, float))


def _same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def dft(f: ComplexField1D) -> np.ndarray:
    """Unnormalized forward DFT of the samples."""
    return np.fft.fft(f.values)


def inverse_dft(spectrum, grid: Grid1D) -> ComplexField1D:
    """Inverse of :func:`dft` (carries the ``1/n`` factor)."""
    return ComplexField1D(grid, np.fft.ifft(np.asarray(spectrum, dtype=complex)))


def spectral_derivative(values: np.ndarray, grid: Grid1D, order: int) -> np.ndarray:
    """Array-level spectral derivative; multiplies mode ``j`` by ``(i k_j)**order``."""
    return np.fft.ifft((1j * grid.wavenumbers) ** order * np.fft.fft(values))


def derivative(f, order: int = 1):
    """Spectral derivative of order 1 or 2.

    A :class:`RealField1D` input returns the real part as a
    :class:`RealField1D`; this discards the odd-order Nyquist contribution,
    which is purely imaginary for real data.
    """
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    d = spectral_derivative(f.values, f.grid, order)
    if isinstance(f, RealField1D):
        return RealField1D(f.grid, d.real)
    return ComplexField1D(f.grid, d)


def integrate(f: RealField1D) -> float:
    """Periodic rectangle rule ``dx * sum(samples)``."""
    return float(f.grid.dx * np.sum(f.values))


def pointwise_abs_pow(f: ComplexField1D, q: float) -> RealField1D:
    if q <= 0:
        raise ValueError(f"exponent must be positive, got {q}")
    a = np.abs(f.values)
    return RealField1D(f.grid, a * a if q == 2 else a**q)


def l2_norm_sq(f: ComplexField1D) -> float:
    return integrate(pointwise_abs_pow(f, 2))


def im_product(a: ComplexField1D, b: ComplexField1D) -> RealField1D:
    """Pointwise ``Im(a * conj(b))``."""
    _same_grid(a, b)
    return RealField1D(a.grid, np.imag(a.values * np.conj(b.values)))


def re_product(a: ComplexField1D, b: ComplexField1D) -> RealField1D:
    """Pointwise ``Re(a * conj(b))``."""
    _same_grid(a, b)
    return RealField1D(a.grid, np.real(a.values * np.conj(b.values)))


def dealias_mask(grid: Grid1D) -> np.ndarray:
    """2/3-rule mask in DFT order: keeps modes with ``|j| <= n/3``."""
    j = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    return (np.abs(j) <= grid.n / 3.0).astype(float)


# -- field snapshot files -----------------------------------------------------

SNAPSHOT_HEADER = ("x", "re", "im")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_snapshot(path, f: ComplexField1D) -> None:
    """Write ``x,re,im`` rows in node order with 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_HEADER)
        for x, v in zip(f.grid.nodes, f.values):
            w.writerow((_fmt(x), _fmt(v.real), _fmt(v.imag)))


def read_snapshot(path, grid: Grid1D | None = None) -> ComplexField1D:
    """Read a snapshot written by :func:`write_snapshot`.

    Without ``grid`` the grid is reconstructed from the node column, which
    must be uniform and start at ``-L/2``.
    """
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SNAPSHOT_HEADER:
            raise ValueError(f"{path}: expected header x,re,im, got {header}")
        rows = [tuple(float(c) for c in row) for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, 3)
    x, re, im = data.T
    if grid is None:
        n = len(x)
        if n < 2:
            raise ValueError(f"{path}: too few rows")
        length = -2.0 * x[0]
        grid = Grid1D(n, length)
    if len(x) != grid.n or not np.allclose(x, grid.nodes, rtol=0, atol=1e-12 * grid.length):
        raise ValueError(f"{path}: node column does not match {grid}")
    return ComplexField1D(grid, re + 1j * im)
