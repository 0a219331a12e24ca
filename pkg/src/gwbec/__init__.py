"""Numerical laboratory for a Bose-Einstein condensate under gravitational-wave strain.

Layers, bottom up:

- units / waveforms: SI bridge and strain signals h(t)
- grids / fieldio:   periodic spectral grids, field (de)serialization
- condensate:        states, Madelung split, observables, vortex preparation
- dynamics:          split-step evolution (flat / metric / gauge) + relaxation
- phonons:           linearized (δρ, δS) system with strain source terms
- detect:            phase shift, fidelity, bounds, hierarchy arithmetic
- config / runner / cli: scenario plumbing
"""

from ._version import VERSION as __version__
from .condensate import (
    CondensateState,
    Observables,
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
from .config import ScenarioConfig, default_config_text, load_config, parse_config
from .detect import (
    DetectionReport,
    DetectionScenario,
    build_report,
    energy_bound,
    fidelity_first_order,
    hierarchy_estimates,
    kinetic_energy_estimate,
    noon_fidelity,
    quadrupole_phase_shift,
    trap_bound,
)
from .dynamics import (
    EvolutionConfig,
    Trajectory,
    evolve,
    relax_imaginary_time,
    stable_dt,
    step_flat,
    step_gauge,
    step_metric,
)
from .errors import ConfigValidationError, EvolutionAbort, GwbecError, InvariantViolation
from .grids import Field, Grid
from .phonons import (
    BackgroundFlow,
    Perturbation,
    background_from,
    evolve_linear,
    fit_frequency,
    make_standing_wave,
    phonon_content,
    perturbation_energy,
    source_terms_gauge,
    source_terms_metric,
    stable_dt_linear,
)
from .runner import emit_plot_script, run_scenario
from .units import HBAR_EVS, UnitSystem, convert
from .waveforms import StrainWaveform, load_tabulated_csv, make_waveform, zero_waveform

__all__ = [
    "__version__",
    "BackgroundFlow",
    "CondensateState",
    "ConfigValidationError",
    "DetectionReport",
    "DetectionScenario",
    "EvolutionAbort",
    "EvolutionConfig",
    "Field",
    "Grid",
    "GwbecError",
    "HBAR_EVS",
    "InvariantViolation",
    "Observables",
    "Perturbation",
    "ScenarioConfig",
    "StrainWaveform",
    "Trajectory",
    "UnitSystem",
    "background_from",
    "build_report",
    "compute_observables",
    "convert",
    "default_config_text",
    "emit_plot_script",
    "energy_bound",
    "evolve",
    "evolve_linear",
    "fidelity_first_order",
    "fit_frequency",
    "healing_length",
    "hierarchy_estimates",
    "kinetic_energy_estimate",
    "load_config",
    "load_tabulated_csv",
    "madelung_compose",
    "madelung_decompose",
    "make_standing_wave",
    "make_waveform",
    "noon_fidelity",
    "parse_config",
    "perturbation_energy",
    "phonon_content",
    "prepare_homogeneous",
    "prepare_plane_wave",
    "prepare_vortex_lattice",
    "prepare_vortex_pair",
    "quadrupole_phase_shift",
    "relax_imaginary_time",
    "run_scenario",
    "source_terms_gauge",
    "source_terms_metric",
    "stable_dt",
    "stable_dt_linear",
    "step_flat",
    "step_gauge",
    "step_metric",
    "trap_bound",
    "vortex_census",
    "zero_waveform",
]
