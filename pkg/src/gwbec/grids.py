"""Periodic Cartesian grids (1-3D) with spectrally exact derivatives.

Axis 0 is x, axis 1 is y, axis 2 is z.  Coordinates are centered on the
origin, x_j = -L/2 + j*dx, so the domain is [-L/2, L/2) on each axis.
Derivatives go through the FFT; the mean is subtracted first so that
derivatives of constant fields are exactly zero on any grid size.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

AXIS_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class Grid:
    """Immutable grid descriptor shared by all fields living on it."""

    extents: tuple[float, ...]
    points: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(L) for L in self.extents))
        object.__setattr__(self, "points", tuple(int(n) for n in self.points))
        if not 1 <= len(self.extents) <= 3:
            raise ValueError("grid dimension must be 1, 2 or 3")
        if len(self.extents) != len(self.points):
            raise ValueError("extents and points must have the same length")
        if any(L <= 0 for L in self.extents):
            raise ValueError("grid extents must be positive")
        if any(n < 4 for n in self.points):
            raise ValueError("need at least 4 points per axis")

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.extents, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    def axis_coordinates(self, axis: int) -> np.ndarray:
        """1D coordinate array along ``axis``, centered at the origin."""
        self._check_axis(axis)
        n, L = self.points[axis], self.extents[axis]
        x = -0.5 * L + (L / n) * np.arange(n)
        x.setflags(write=False)
        return x

    def coordinate_mesh(self, axis: int) -> np.ndarray:
        """Coordinate along ``axis`` shaped for broadcasting over fields."""
        return _broadcast_1d(self.axis_coordinates(axis), axis, self.dim)

    def wavenumbers(self, axis: int) -> np.ndarray:
        """FFT-ordered wavenumbers 2*pi*n/L along ``axis``."""
        self._check_axis(axis)
        n, L = self.points[axis], self.extents[axis]
        k = 2.0 * np.pi * np.fft.fftfreq(n, d=L / n)
        k.setflags(write=False)
        return k

    def wavenumber_mesh(self, axis: int) -> np.ndarray:
        return _broadcast_1d(self.wavenumbers(axis), axis, self.dim)

    def k_squared_tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(k_total^2, k_x^2, k_y^2) broadcast over the grid; y table is 0 in 1D."""
        return _k_squared_tables(self)

    def _check_axis(self, axis: int):
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for a {self.dim}D grid")


def _broadcast_1d(arr: np.ndarray, axis: int, dim: int) -> np.ndarray:
    shape = [1] * dim
    shape[axis] = arr.size
    return arr.reshape(shape)


@lru_cache(maxsize=64)
def _k_squared_tables(grid: Grid):
    kx2 = grid.wavenumber_mesh(0) ** 2
    ky2 = grid.wavenumber_mesh(1) ** 2 if grid.dim >= 2 else np.zeros_like(kx2)
    k2 = kx2 + ky2
    if grid.dim == 3:
        k2 = k2 + grid.wavenumber_mesh(2) ** 2
    for table in (k2, kx2, ky2):
        table.setflags(write=False)
    return k2, kx2, ky2


@dataclass
class Field:
    """Scalar field sampled on a grid; real (float64) or complex (complex128)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != self.grid.shape:
            raise ValueError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        if np.iscomplexobj(values):
            self.values = np.ascontiguousarray(values, dtype=np.complex128)
        else:
            self.values = np.ascontiguousarray(values, dtype=np.float64)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def constant_field(grid: Grid, value: float | complex) -> Field:
    dtype = np.complex128 if isinstance(value, complex) else np.float64
    return Field(grid, np.full(grid.shape, value, dtype=dtype))


def _same_grid(a: Field, b: Field):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def spectral_derivative(grid: Grid, values: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
    """d^order/dx_axis^order of periodic data; exact for band-limited fields.

    The mean is removed before transforming: constants differentiate to
    exact zeros, and the mean never contributes to any derivative.
    """
    grid._check_axis(axis)
    work = values - values.mean()
    spec = np.fft.fft(work, axis=axis)
    ik = 1j * grid.wavenumber_mesh(axis)
    spec *= ik**order
    out = np.fft.ifft(spec, axis=axis)
    return out if np.iscomplexobj(values) else out.real


def gradient(field: Field, axis: int) -> Field:
    """Spectral first derivative along ``axis``."""
    return Field(field.grid, spectral_derivative(field.grid, field.values, axis, order=1))


def laplacian_strained(field: Field, h: float) -> Field:
    """Anisotropic Laplacian [1+h] d2/dx2 + [1-h] d2/dy2 + d2/dz2.

    h = 0 reduces bit-exactly to the flat Laplacian; |h| >= 1 leaves the
    weak-field regime and is rejected.
    """
    if not abs(h) < 1.0:
        raise ValueError(f"strain |h| = {abs(h)} is outside the weak-field regime |h| < 1")
    grid = field.grid
    k2, kx2, ky2 = grid.k_squared_tables()
    multiplier = -(k2 + h * (kx2 - ky2))
    work = field.values - field.values.mean()
    out = np.fft.ifftn(multiplier * np.fft.fftn(work))
    if not field.is_complex:
        out = out.real
    return Field(grid, out)


def laplacian(field: Field) -> Field:
    return laplacian_strained(field, 0.0)


def integrate(field: Field):
    """Volume integral: Riemann sum, which is exact trapezoid on a periodic grid."""
    total = field.values.sum() * field.grid.cell_volume
    return total if field.is_complex else float(total)


def integrate_array(grid: Grid, values: np.ndarray):
    total = values.sum() * grid.cell_volume
    return total if np.iscomplexobj(values) else float(total)


def l2_norm(field: Field) -> float:
    """sqrt of the integrated squared magnitude."""
    return float(np.sqrt(np.sum(np.abs(field.values) ** 2) * field.grid.cell_volume))


def spectral_power(field: Field) -> float:
    """Wavenumber-space value of the integral of |f|^2 (Parseval partner)."""
    spec = np.fft.fftn(field.values)
    return float(np.sum(np.abs(spec) ** 2) / field.grid.size * field.grid.cell_volume)
