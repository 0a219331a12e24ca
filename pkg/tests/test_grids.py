"""Spectral grid: derivatives, strained Laplacian, Parseval, integration."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gwbec.grids import (
    Field,
    Grid,
    constant_field,
    gradient,
    integrate,
    l2_norm,
    laplacian,
    laplacian_strained,
    spectral_derivative,
    spectral_power,
)


def _plane_wave(grid, nx, ny):
    kx = 2 * np.pi * nx / grid.extents[0]
    ky = 2 * np.pi * ny / grid.extents[1]
    x = grid.coordinate_mesh(0)
    y = grid.coordinate_mesh(1)
    return np.exp(1j * (kx * x + ky * y)) * np.ones(grid.shape), kx, ky


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(extents=(1.0,), points=(2,))
    with pytest.raises(ValueError):
        Grid(extents=(1.0, -1.0), points=(8, 8))
    with pytest.raises(ValueError):
        Grid(extents=(1.0, 1.0, 1.0, 1.0), points=(8, 8, 8, 8))
    with pytest.raises(ValueError):
        Grid(extents=(1.0, 1.0), points=(8,))


def test_spacing_and_volumes(grid32):
    assert grid32.spacing == (0.5, 0.5)
    assert grid32.cell_volume == pytest.approx(0.25)
    assert grid32.volume == pytest.approx(256.0)
    assert grid32.size == 1024


def test_axis_coordinates_centered(grid32):
    x = grid32.axis_coordinates(0)
    assert x[0] == -8.0
    assert x[-1] == pytest.approx(8.0 - 0.5)
    assert np.all(np.diff(x) == pytest.approx(0.5))


def test_derivative_exact_on_plane_wave(grid32):
    values, kx, _ = _plane_wave(grid32, 3, 0)
    d = spectral_derivative(grid32, values, 0)
    assert np.allclose(d, 1j * kx * values, atol=1e-12)


def test_second_derivative_order_param(grid32):
    values, kx, _ = _plane_wave(grid32, 2, 0)
    d2 = spectral_derivative(grid32, values, 0, order=2)
    assert np.allclose(d2, -(kx**2) * values, atol=1e-12)


def test_derivative_of_constant_is_exact_zero(grid32):
    d = spectral_derivative(grid32, np.full(grid32.shape, 7.3), 0)
    assert np.all(d == 0.0)


def test_real_input_gives_real_derivative(grid32):
    x = grid32.coordinate_mesh(0) * np.ones(grid32.shape)
    d = spectral_derivative(grid32, np.cos(2 * np.pi * x / grid32.extents[0]), 0)
    assert d.dtype == np.float64


def test_laplacian_matches_plane_wave_eigenvalue(grid32):
    values, kx, ky = _plane_wave(grid32, 2, 5)
    lap = laplacian(Field(grid32, values))
    assert np.allclose(lap.values, -(kx**2 + ky**2) * values, atol=1e-11)


def test_strained_laplacian_affine_in_h(grid32):
    """L_h = L_0 + h*(d2/dx2 - d2/dy2) exactly, checked at two strains."""
    rng = np.random.Generator(np.random.Philox(5))
    values = rng.standard_normal(grid32.shape)
    f = Field(grid32, values)
    l0 = laplacian_strained(f, 0.0).values
    la = laplacian_strained(f, 0.25).values
    lb = laplacian_strained(f, 0.5).values
    # affine: the anisotropic part at h=0.5 is exactly twice that at h=0.25
    assert np.allclose(lb - l0, 2.0 * (la - l0), rtol=1e-12, atol=1e-12)


def test_strained_laplacian_h_zero_bit_identical(grid32):
    rng = np.random.Generator(np.random.Philox(6))
    f = Field(grid32, rng.standard_normal(grid32.shape))
    assert np.array_equal(laplacian_strained(f, 0.0).values, laplacian(f).values)


def test_strained_laplacian_rejects_strong_field(grid32):
    f = constant_field(grid32, 1.0)
    with pytest.raises(ValueError):
        laplacian_strained(f, 1.0)
    with pytest.raises(ValueError):
        laplacian_strained(f, -1.5)


def test_strain_swaps_axes_antisymmetrically(grid32):
    """h -> -h must mirror the x/y anisotropy for an axis-swapped field."""
    rng = np.random.Generator(np.random.Philox(7))
    values = rng.standard_normal(grid32.shape)
    f = Field(grid32, values)
    ft = Field(grid32, values.T.copy())
    a = laplacian_strained(f, 0.3).values
    b = laplacian_strained(ft, -0.3).values
    assert np.allclose(a.T, b, atol=1e-12)


def test_integrate_constant(grid32):
    assert integrate(constant_field(grid32, 2.0)) == pytest.approx(2.0 * grid32.volume)


@given(nx=st.integers(min_value=-5, max_value=5), ny=st.integers(min_value=-5, max_value=5))
def test_parseval_identity(nx, ny):
    grid = Grid(extents=(8.0, 8.0), points=(16, 16))
    values, _, _ = _plane_wave(grid, nx, ny)
    f = Field(grid, values + 0.3)
    assert spectral_power(f) == pytest.approx(l2_norm(f) ** 2, rel=1e-12)


@given(seed=st.integers(min_value=0, max_value=2**31))
def test_parseval_identity_random_fields(seed):
    grid = Grid(extents=(4.0, 6.0), points=(8, 16))
    rng = np.random.Generator(np.random.Philox(seed))
    f = Field(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    assert spectral_power(f) == pytest.approx(l2_norm(f) ** 2, rel=1e-12)


def test_gradient_wrapper_matches_derivative(grid32):
    rng = np.random.Generator(np.random.Philox(8))
    values = rng.standard_normal(grid32.shape)
    g = gradient(Field(grid32, values), 1)
    assert np.array_equal(g.values, spectral_derivative(grid32, values, 1))


def test_field_rejects_wrong_shape(grid32):
    with pytest.raises(ValueError):
        Field(grid32, np.zeros((3, 3)))


def test_wavenumbers_nyquist(grid32):
    k = grid32.wavenumbers(0)
    assert k[0] == 0.0
    # FFT layout: positive frequencies first, most negative at n/2
    assert k[1] == pytest.approx(2 * np.pi / grid32.extents[0])
    assert k.min() == pytest.approx(-np.pi / grid32.spacing[0])
