"""Detection-side estimates: phase shift, fidelity, bounds, hierarchy.

The condensate couples to the strain through the quadrupole anisotropy
Q(t) = (ħ²/2m)∫(|∂x ψ|² - |∂y ψ|²); the accumulated first-order phase is

    φ = -(1/ħ) ∫ dt h(t) Q(t),

which is strictly bounded, |φ| ≤ T h_max E/ħ, because |Q| ≤ E_kin ≤ E.
That chain is asserted at runtime — a violation is a bug in the pipeline,
not a physics result, and raises InvariantViolation.

All SI arithmetic uses ħ = 6.582119569e-16 eV·s; scenario energies are in
eV and times in seconds.  φ itself is dimensionless and can equally be
accumulated in simulation units.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import simpson

from . import waveforms
from .errors import InvariantViolation
from .units import EV_TO_JOULE, HBAR_EVS, SIM_TO_SI, UnitSystem, convert

FIDELITY_EXPANSION_WARN = 0.3
# Composite quadrature may overshoot the analytic chain by roundoff only.
BOUND_SLACK = 1e-9


class ExpansionWarning(UserWarning):
    """First-order fidelity expansion is strained (|φ| not small)."""


def quadrupole_phase_shift(times, Q, waveform: waveforms.StrainWaveform, hbar: float) -> float:
    """φ = -(1/ħ) ∫ h(t) Q(t) dt by composite Simpson on the native grid.

    ``times``/``Q`` may come straight from a trajectory (pass
    trajectory.times and trajectory.series("Q")); the waveform must cover
    the sampled range.  ``hbar`` is the action scale the Q series is in.
    """
    times = np.asarray(times, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if times.size != Q.size or times.size < 3:
        raise ValueError("need matching series with at least 3 samples")
    if times[0] < 0 or times[-1] > waveform.duration * (1.0 + 1e-9):
        raise ValueError(
            f"trajectory range [{times[0]}, {times[-1]}] is outside the waveform "
            f"domain [0, {waveform.duration}]"
        )
    h, _, _ = waveforms.sample(waveform, times)
    return float(-simpson(h * Q, x=times) / hbar)


def fidelity_first_order(phi: float) -> dict:
    """First-order overlap 1 - iφ: deviation |φ|, purely imaginary correction.

    Warns when |φ| exceeds 0.3 and flags the result — beyond that the
    Taylor truncation underlying the formula is strained.
    """
    deviation = abs(float(phi))
    strained = deviation > FIDELITY_EXPANSION_WARN
    if strained:
        warnings.warn(
            f"|phi| = {deviation:.3g} strains the first-order fidelity expansion",
            ExpansionWarning,
            stacklevel=2,
        )
    return {
        "fidelity_deviation": deviation,
        "purely_imaginary": True,
        "expansion_strained": strained,
    }


def energy_bound(T: float, h_max: float, E: float, hbar: float = HBAR_EVS) -> float:
    """|φ| ≤ T h_max E / ħ (T in s, E in eV for the default ħ)."""
    if T <= 0 or h_max < 0 or E < 0:
        raise ValueError("need T > 0 and nonnegative h_max, E")
    return T * h_max * E / hbar


def trap_bound(T: float, h_max: float, N: float, dVdh_max: float, hbar: float = HBAR_EVS) -> float:
    """|φ| ≤ T h_max N |∂V/∂h|_max / ħ for the trap-coupling channel."""
    if T <= 0 or h_max < 0 or N < 0 or dVdh_max < 0:
        raise ValueError("need T > 0 and nonnegative h_max, N, dVdh")
    return T * h_max * N * dVdh_max / hbar


def kinetic_energy_estimate(N: float, v_typ: float, mass_kg: float) -> float:
    """Total kinetic energy N m v²/2 in eV (v in m/s, mass in kg)."""
    if N < 0 or v_typ < 0 or mass_kg <= 0:
        raise ValueError("need nonnegative N, v and positive mass")
    return N * 0.5 * mass_kg * v_typ**2 / EV_TO_JOULE


def hierarchy_estimates(N: float, n: float, h: float) -> tuple[float, float, float, float]:
    """The four coupling scales (hN, h√(nN), hn, h), strictly ordered for 1 < n < N."""
    if n < 0 or N < 1:
        raise ValueError("need N >= 1 and n >= 0")
    if n > N:
        raise ValueError("phonon number cannot exceed atom number")
    return (h * N, h * np.sqrt(n * N), h * n, h)


def noon_fidelity(epsilon: float, N: int) -> tuple[float, float]:
    """Condensate-wide fidelity (1-ε)^N, exact (log-domain) and linearized 1-Nε."""
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    if N < 1:
        raise ValueError("N must be at least 1")
    exact = 0.0 if epsilon == 1.0 else float(np.exp(N * np.log1p(-epsilon)))
    return exact, 1.0 - N * epsilon


def coherent_vs_incoherent(epsilon: float, N: float) -> dict:
    """Nε (coherent amplitudes) against Nε² (incoherent probabilities)."""
    return {"coherent_N_eps": N * epsilon, "incoherent_N_eps2": N * epsilon**2}


@dataclass(frozen=True)
class DetectionScenario:
    """SI-side inputs for the bound and hierarchy arithmetic.

    T in seconds, energies in eV; ``units`` records the simulation bridge
    when the numbers came from a trajectory (None for pure arithmetic).
    """

    waveform: waveforms.StrainWaveform
    T: float
    N: float
    n: float
    E_total: float
    E_kin: float
    dVdh_max: float = 0.0
    n_source: str = "user"
    units: UnitSystem | None = None

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("integration time must be positive")
        if self.N < 1:
            raise ValueError("need at least one atom")
        if self.n < 0:
            raise ValueError("phonon number must be nonnegative")
        if not 0 <= self.E_kin <= self.E_total:
            raise ValueError("need 0 <= E_kin <= E_total")


@dataclass(frozen=True)
class DetectionReport:
    phi: float
    fidelity_deviation: float
    purely_imaginary: bool
    expansion_strained: bool
    bound_energy: float
    bound_trap: float
    hierarchy: tuple[float, float, float, float]
    margins: dict
    scenario: dict
    flags: tuple[str, ...] = ()

    def to_json(self) -> str:
        payload = asdict(self)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def build_report(scenario: DetectionScenario, phi: float) -> DetectionReport:
    """Assemble the full report and enforce |φ| ≤ energy bound.

    The bound is the analytic chain |Q| ≤ E_kin ≤ E integrated over T; a
    computed φ beyond it (plus quadrature roundoff slack) means the
    pipeline is broken and raises InvariantViolation.
    """
    h_max = scenario.waveform.h_max
    bound_e = energy_bound(scenario.T, h_max, scenario.E_total)
    bound_t = trap_bound(scenario.T, h_max, scenario.N, scenario.dVdh_max)
    if abs(phi) > bound_e * (1.0 + BOUND_SLACK) + 1e-300:
        raise InvariantViolation(
            f"|phi| = {abs(phi):.6e} exceeds the energy bound {bound_e:.6e}"
        )
    fid = fidelity_first_order(phi)
    hierarchy = hierarchy_estimates(scenario.N, scenario.n, h_max)

    flags = []
    if scenario.n == scenario.N:
        flags.append("hierarchy_boundary: n equals N, first two levels coincide")
    elif h_max > 0 and 1 < scenario.n < scenario.N:
        if not (hierarchy[0] > hierarchy[1] > hierarchy[2] > hierarchy[3]):
            raise InvariantViolation(f"hierarchy {hierarchy} is not strictly decreasing")

    # None, not inf: the report must stay strict JSON
    margins = {
        "energy_bound_over_phi": bound_e / abs(phi) if phi != 0 else None,
        "trap_bound_over_phi": bound_t / abs(phi) if phi != 0 else None,
    }
    scenario_echo = {
        "waveform": scenario.waveform.tag,
        "h_max": h_max,
        "T": scenario.T,
        "N": scenario.N,
        "n": scenario.n,
        "n_source": scenario.n_source,
        "E_total_eV": scenario.E_total,
        "E_kin_eV": scenario.E_kin,
        "dVdh_max_eV": scenario.dVdh_max,
        "hbar_eVs": HBAR_EVS,
    }
    if scenario.units is not None:
        scenario_echo["unit_scales"] = {
            "length_m": scenario.units.length_scale,
            "time_s": scenario.units.time_scale,
            "energy_eV": scenario.units.energy_scale,
        }
    return DetectionReport(
        phi=float(phi),
        fidelity_deviation=fid["fidelity_deviation"],
        purely_imaginary=fid["purely_imaginary"],
        expansion_strained=fid["expansion_strained"],
        bound_energy=bound_e,
        bound_trap=bound_t,
        hierarchy=hierarchy,
        margins=margins,
        scenario=scenario_echo,
        flags=tuple(flags),
    )


def scenario_from_trajectory(
    trajectory,
    waveform: waveforms.StrainWaveform,
    units: UnitSystem,
    n_phonons: float = 0.0,
    n_source: str = "user",
    dVdh_max: float = 0.0,
) -> tuple[DetectionScenario, float]:
    """SI scenario + φ from a simulated trajectory (reference Q(t) series).

    Trajectory quantities are converted with the unit system: times to
    seconds, energies to eV.  φ is dimensionless and evaluated in
    simulation units directly.
    """
    times = trajectory.times
    Q = trajectory.series("Q")
    phi = quadrupole_phase_shift(times, Q, waveform, units.hbar)

    obs0 = trajectory.observables[0]
    T_si = convert(float(times[-1] - times[0]), "time", SIM_TO_SI, units)
    scenario = DetectionScenario(
        waveform=waveform,
        T=T_si,
        N=max(obs0.N, 1.0),
        n=n_phonons,
        E_total=convert(obs0.E_total, "energy", SIM_TO_SI, units),
        E_kin=convert(obs0.E_kin, "energy", SIM_TO_SI, units),
        dVdh_max=dVdh_max,
        n_source=n_source,
        units=units,
    )
    return scenario, phi
