"""Condensate states: Madelung split, observables, vortices, rotating lattice."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwbec import (
    CondensateState,
    Grid,
    UnitSystem,
    compute_observables,
    healing_length,
    madelung_compose,
    madelung_decompose,
    prepare_homogeneous,
    prepare_plane_wave,
    prepare_vortex_lattice,
    prepare_vortex_pair,
    vortex_census,
)
from gwbec.condensate import (
    CENSUS_VACUUM_FRACTION,
    feynman_lattice_spacing,
    feynman_vortex_count,
    imprint_vortex,
    loop_winding,
    prepare_vortex_checkerboard,
    prepare_vortex_set,
    total_winding,
)
from gwbec.grids import Field
from gwbec import dynamics


UNITS = UnitSystem.natural()


def _random_state(grid, seed, units=UNITS):
    rng = np.random.Generator(np.random.Philox(seed))
    base = 1.0 + 0.4 * rng.random(grid.shape)
    phase = 0.8 * rng.standard_normal(grid.shape)
    # smooth both so the density floor never trips
    def lowpass(a):
        spec = np.fft.fftn(a)
        k2, _, _ = grid.k_squared_tables()
        return np.fft.ifftn(spec * np.exp(-0.5 * k2)).real
    psi = np.sqrt(np.abs(lowpass(base)) + 0.2) * np.exp(1j * lowpass(phase))
    return CondensateState(psi=Field(grid, psi), t=0.0, units=units, g=1.0)


# --- Madelung split ---------------------------------------------------------


def test_compose_decompose_round_trip(grid32):
    state = _random_state(grid32, 21)
    hydro = madelung_decompose(state)
    rebuilt = madelung_compose(hydro.rho, hydro.S, state.hbar)
    # global phase of psi is not observable; compare densities and currents
    assert np.allclose(np.abs(rebuilt.values) ** 2,
                       np.abs(state.psi.values) ** 2, rtol=1e-10, atol=1e-12)
    ratio = rebuilt.values / state.psi.values
    assert np.allclose(np.abs(ratio), 1.0, atol=1e-10)


def test_plane_wave_velocity(grid32):
    state = prepare_plane_wave(grid32, 1.0, (2, 0), 1.0, UNITS)
    hydro = madelung_decompose(state)
    k = 2 * np.pi * 2 / grid32.extents[0]
    v_expected = UNITS.hbar * k / UNITS.mass
    assert np.allclose(hydro.v[0].values, v_expected, rtol=1e-10)
    assert np.allclose(hydro.v[1].values, 0.0, atol=1e-12)


def test_homogeneous_observables(grid32):
    rho0, g = 1.3, 0.7
    state = prepare_homogeneous(grid32, rho0, g, UNITS)
    obs = compute_observables(state)
    vol = grid32.volume
    assert obs.N == pytest.approx(rho0 * vol, rel=1e-12)
    assert obs.E_kin == pytest.approx(0.0, abs=1e-12)
    assert obs.E_int == pytest.approx(0.5 * g * rho0**2 * vol, rel=1e-12)
    assert obs.Q == pytest.approx(0.0, abs=1e-12)
    assert obs.Lz == pytest.approx(0.0, abs=1e-10)


def test_potential_energy_term(grid32):
    state = prepare_homogeneous(grid32, 2.0, 0.5, UNITS)
    pot = Field(grid32, np.full(grid32.shape, 0.25))
    obs = compute_observables(state, pot)
    assert obs.E_pot == pytest.approx(0.25 * state.norm, rel=1e-12)
    assert obs.E_total == pytest.approx(obs.E_kin + obs.E_int + obs.E_pot, rel=1e-12)


def test_plane_wave_quadrupole_sign(grid32):
    # flow along x makes |dpsi/dx| exceed |dpsi/dy|: Q > 0
    state = prepare_plane_wave(grid32, 1.0, (3, 0), 1.0, UNITS)
    assert compute_observables(state).Q > 0
    state_y = prepare_plane_wave(grid32, 1.0, (0, 3), 1.0, UNITS)
    assert compute_observables(state_y).Q < 0


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=15)
def test_quadrupole_never_exceeds_kinetic_energy(seed):
    grid = Grid(extents=(8.0, 8.0), points=(16, 16))
    obs = compute_observables(_random_state(grid, seed))
    assert abs(obs.Q) <= obs.E_kin  # floating-point-hard by construction


def test_healing_length_value():
    assert healing_length(2.0, 0.5, hbar=1.0, mass=1.0) == pytest.approx(1.0 / np.sqrt(2.0))
    assert healing_length(0.0, 1.0) == np.inf


def test_positive_center_vortex_carries_positive_angular_momentum(grid64):
    """Sign-convention anchor: +1 winding at the origin means Lz > 0.

    This pins imprint, loop winding, and Lz to the same counterclockwise
    sense; every rotating-lattice property below builds on it.
    """
    state = prepare_homogeneous(grid64, 1.0, 1.0, UNITS)
    state = imprint_vortex(state, (0.0, 0.0), 1)
    assert compute_observables(state).Lz > 0


# --- vortex detection -------------------------------------------------------


def test_imprint_winding_detected(grid64):
    state = prepare_homogeneous(grid64, 1.0, 1.0, UNITS)
    state = imprint_vortex(state, (0.0, 0.0), 1)
    assert loop_winding(state, (0.0, 0.0), 2.0) == 1


def test_imprint_double_charge(grid64):
    state = prepare_homogeneous(grid64, 1.0, 1.0, UNITS)
    state = imprint_vortex(state, (0.0, 0.0), 2)
    assert loop_winding(state, (0.0, 0.0), 2.0) == 2


def test_imprinted_core_empties_out_under_relaxation(grid32):
    """Imprinted dips start at the healing-length guess; relaxation must carve
    the core down to a truly empty center (< 1% of the bulk density).

    The core is placed on an exact grid point so "density at the center" is a
    plain sample, and inversion symmetry keeps the node from wandering.
    """
    rho0 = 1.0
    state = imprint_vortex(prepare_homogeneous(grid32, rho0, 1.0, UNITS), (0.0, 0.0), 1)
    cfg = dynamics.EvolutionConfig(
        dt=dynamics.stable_dt(grid32, UNITS),
        n_steps=4000,
        scheme="imaginary_time",
        relax_tol=1e-12,
    )
    relaxed = dynamics.relax_imaginary_time(state, cfg).state
    i0 = int(np.argmin(np.abs(grid32.axis_coordinates(0))))
    j0 = int(np.argmin(np.abs(grid32.axis_coordinates(1))))
    rho = np.abs(relaxed.psi.values) ** 2
    assert rho[i0, j0] < 0.01 * rho0
    assert loop_winding(relaxed, (0.0, 0.0), 2.0) == 1  # charge survived the flow


def test_imprint_rejects_zero_charge_and_bad_position(grid64):
    state = prepare_homogeneous(grid64, 1.0, 1.0, UNITS)
    with pytest.raises(ValueError):
        imprint_vortex(state, (0.0, 0.0), 0)
    with pytest.raises(ValueError):
        imprint_vortex(state, (99.0, 0.0), 1)


def test_vortex_pair_census(grid64):
    state = prepare_vortex_pair(grid64, 1.0, 1.0, UNITS)
    sightings = vortex_census(state)
    assert len(sightings) == 2
    assert total_winding(sightings) == 0
    by_sign = {s.winding: s for s in sightings}
    assert by_sign[+1].x < 0 < by_sign[-1].x  # +1 sits on the negative-x side
    assert abs(by_sign[+1].y) < 1.0 and abs(by_sign[-1].y) < 1.0
    # plaquette census and loop integral agree on the sign
    assert loop_winding(state, (by_sign[+1].x, by_sign[+1].y), 1.5) == +1


def test_checkerboard_four_alternating_cores(grid64):
    state = prepare_vortex_checkerboard(grid64, 1.0, 1.0, UNITS)
    sightings = vortex_census(state)
    assert len(sightings) == 4
    assert total_winding(sightings) == 0
    # same-sign cores sit on a diagonal
    for s in sightings:
        assert s.winding == (1 if s.x * s.y > 0 else -1)


def test_checkerboard_pattern_is_pinned_by_symmetry(grid32):
    """The 2x2 cell must not translate under its own induced flow."""
    state = prepare_vortex_checkerboard(grid32, 1.0, 1.0, UNITS)
    before = vortex_census(state)
    cfg = dynamics.EvolutionConfig(
        dt=dynamics.stable_dt(grid32, UNITS), n_steps=400, scheme="flat"
    )
    moved = dynamics.evolve(state, cfg).final_state
    after = vortex_census(moved, rho_cut=0.05)
    assert len(after) == len(before) == 4
    dx = grid32.spacing[0]
    for b in before:
        partner = min(after, key=lambda s: np.hypot(s.x - b.x, s.y - b.y))
        assert partner.winding == b.winding
        assert np.hypot(partner.x - b.x, partner.y - b.y) <= dx  # sub-cell jitter only


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=15)
def test_total_winding_on_torus_is_always_zero(seed):
    # plaquette circulations telescope: whatever the field, the sum vanishes
    grid = Grid(extents=(8.0, 8.0), points=(16, 16))
    sightings = vortex_census(_random_state(grid, seed))
    assert total_winding(sightings) == 0


def test_feynman_count_arithmetic():
    # m*Omega*A/(pi*hbar)
    assert feynman_vortex_count(0.12, 500.0, 1.0, 1.0) == pytest.approx(
        0.12 * 500.0 / np.pi, rel=1e-12
    )


def test_feynman_spacing_gives_unit_cell_area():
    a = feynman_lattice_spacing(0.12, UNITS)
    cell = a**2 * np.sqrt(3.0) / 2.0  # triangular cell
    assert cell == pytest.approx(np.pi * UNITS.hbar / (UNITS.mass * 0.12), rel=1e-12)


# --- rotating lattice (seeded relaxation) -----------------------------------


def test_zero_rotation_relaxes_to_homogeneous():
    grid = Grid(extents=(8.0, 8.0), points=(16, 16))
    state = prepare_homogeneous(grid, 1.0, 1.0, UNITS)
    rng = np.random.Generator(np.random.Philox(3))
    noisy = state.with_values(
        state.psi.values * (1.0 + 0.05 * (rng.standard_normal(grid.shape)
                                          + 1j * rng.standard_normal(grid.shape)))
    )
    cfg = dynamics.EvolutionConfig(
        dt=2.0 * dynamics.stable_dt(grid, UNITS),
        n_steps=20000,
        scheme="imaginary_time",
        relax_tol=1e-14,
    )
    res = dynamics.relax_imaginary_time(noisy, cfg)
    rho = np.abs(res.state.psi.values) ** 2
    assert float(rho.var()) < 1e-8 * 1.0**2
    assert not vortex_census(res.state)


def test_lattice_prepare_rejects_bad_arguments(grid32):
    with pytest.raises(ValueError):
        prepare_vortex_lattice(grid32, -0.1, 1.0, 1.0, UNITS)
    with pytest.raises(ValueError):
        prepare_vortex_lattice(grid32, 0.1, 0.0, 1.0, UNITS)
    with pytest.raises(ValueError):
        prepare_vortex_lattice(Grid(extents=(8.0,), points=(16,)), 0.1, 1.0, 1.0, UNITS)


def test_lattice_omega_zero_is_exactly_homogeneous(grid32):
    res = prepare_vortex_lattice(grid32, 0.0, 1.0, 1.0, UNITS)
    rho = np.abs(res.state.psi.values) ** 2
    assert float(rho.var()) < 1e-20


def test_rotating_lattice_contract():
    """Moderate rotation: Feynman-scale count, uniform sign, empty cores.

    One deliberately heavyweight run (~30 s): a flat-disk well on a
    128-point grid, seeded relaxation, then every contract clause checked
    on the same relaxed state.
    """
    grid = Grid(extents=(38.4, 38.4), points=(128, 128))
    omega, g, rho0 = 0.12, 0.5, 1.6
    res = prepare_vortex_lattice(grid, omega, g, rho0, UNITS, seed=0)
    state = res.state
    assert res.monotonic  # descent never climbed

    rho = np.abs(state.psi.values) ** 2
    dv = grid.cell_volume
    sightings = vortex_census(state, rho_cut=CENSUS_VACUUM_FRACTION * float(rho.max()))

    # every detected singularity co-rotates
    assert sightings, "relaxation lost all vortices"
    assert all(s.winding == +1 for s in sightings)

    # count within +-30% of the rigid-body estimate over the cloud area
    area = float((rho.sum() * dv) ** 2 / np.sum(rho**2) / dv)
    expected = feynman_vortex_count(omega, area, UNITS.mass, UNITS.hbar)
    assert abs(len(sightings) - expected) <= 0.3 * expected

    # the census fires on depressions, never on plain bulk (shoulder cores on
    # the outermost ring only dip partway at this resolution)
    bulk = float(np.median(rho[rho > 0.5 * rho.max()]))
    xs = grid.axis_coordinates(0)
    ys = grid.axis_coordinates(1)
    for s in sightings:
        ix = int(np.argmin(np.abs(xs - s.x)))
        iy = int(np.argmin(np.abs(ys - s.y)))
        assert rho[ix, iy] < 0.35 * bulk

    # circulation is quantized: unit winding around well-separated cores
    for s in sightings[:3]:
        if np.hypot(s.x, s.y) < 8.0:
            assert loop_winding(state, (s.x, s.y), 1.2) == +1

    # compensating charges live in the wall vacuum, not in the cloud
    corner = rho[0, 0]
    assert corner < 1e-12 * rho.max()
