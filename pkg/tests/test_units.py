"""Unit-system construction, conversion round-trips, and scale arithmetic."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gwbec.units import (
    ATOMIC_MASS_KG,
    EV_TO_JOULE,
    HBAR_EVS,
    HBAR_JS,
    QUANTITY_KINDS,
    RB87_MASS_KG,
    SI_TO_SIM,
    SIM_TO_SI,
    UnitSystem,
    convert,
)


def test_natural_system_is_rb87_micron_bridge():
    u = UnitSystem.natural()
    assert u.hbar == 1.0
    assert u.mass == 1.0
    assert u.length_scale == 1e-6  # one simulation length unit is a micron
    # the SI bridge stays self-consistent: E*t carries hbar in eV s
    assert u.energy_scale * u.time_scale == pytest.approx(HBAR_EVS, rel=1e-12)


def test_rb87_mass_is_87_atomic_units():
    assert RB87_MASS_KG == pytest.approx(87 * ATOMIC_MASS_KG, rel=1e-2)


def test_for_atom_consistency_invariant():
    u = UnitSystem.for_atom()
    # energy and time scales must multiply to hbar expressed in eV s
    assert u.energy_scale * u.time_scale == pytest.approx(HBAR_EVS / u.hbar, rel=1e-12)


def test_for_atom_rejects_nonpositive_inputs():
    with pytest.raises(ValueError):
        UnitSystem.for_atom(mass_kg=0.0)
    with pytest.raises(ValueError):
        UnitSystem.for_atom(length_m=-1e-6)


def test_inconsistent_scales_rejected():
    u = UnitSystem.for_atom()
    with pytest.raises(ValueError):
        UnitSystem(
            hbar=u.hbar,
            mass=u.mass,
            length_scale=u.length_scale,
            time_scale=u.time_scale,
            energy_scale=u.energy_scale * 1.5,
        )


def test_time_scale_value_rb87_micron():
    # t0 = m L^2 / hbar for one micron of Rb-87: 1.444e-25 * 1e-12 / 1.0546e-34
    u = UnitSystem.for_atom()
    expected = RB87_MASS_KG * (1e-6) ** 2 / HBAR_JS
    assert u.time_scale == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(1.369e-3, rel=1e-3)


def test_convert_length_round_trip_exact_inverse():
    u = UnitSystem.for_atom()
    si = convert(2.5, "length", SIM_TO_SI, u)
    assert si == pytest.approx(2.5e-6, rel=1e-12)
    assert convert(si, "length", SI_TO_SIM, u) == pytest.approx(2.5, rel=1e-12)


def test_convert_rejects_unknown_kind_and_direction():
    u = UnitSystem.natural()
    with pytest.raises(ValueError):
        convert(1.0, "charge", SIM_TO_SI, u)
    with pytest.raises(ValueError):
        convert(1.0, "length", "backwards", u)


def test_velocity_scale_is_length_over_time():
    u = UnitSystem.for_atom()
    assert u.velocity_scale == pytest.approx(u.length_scale / u.time_scale, rel=1e-12)


def test_action_scale_is_energy_times_time():
    u = UnitSystem.for_atom()
    assert u.action_scale == pytest.approx(u.energy_scale * u.time_scale, rel=1e-12)


@given(
    value=st.floats(min_value=1e-6, max_value=1e6),
    kind=st.sampled_from(QUANTITY_KINDS),
)
def test_conversion_round_trip_property(value, kind):
    u = UnitSystem.for_atom()
    there = convert(value, kind, SIM_TO_SI, u)
    back = convert(there, kind, SI_TO_SIM, u)
    assert back == pytest.approx(value, rel=1e-12)


def test_kinetic_scale_hand_value():
    # half m v^2 for Rb-87 at 1 mm/s, in eV
    e_j = 0.5 * RB87_MASS_KG * (1e-3) ** 2
    assert e_j / EV_TO_JOULE == pytest.approx(4.5e-13, rel=0.02)
