"""Simulation units and SI conversion.

The PDE kernels run in simulation units with hbar = mass = 1 by default;
every piece of SI arithmetic (eV, seconds, metres) lives here so that the
detection-side formulas can be evaluated against laboratory numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

HBAR_EVS = 6.582119569e-16      # eV s (CODATA)
HBAR_JS = 1.054571817e-34       # J s
EV_TO_JOULE = 1.602176634e-19   # J per eV (exact)
ATOMIC_MASS_KG = 1.66053906660e-27
RB87_MASS_KG = 87 * ATOMIC_MASS_KG

QUANTITY_KINDS = ("length", "time", "energy", "velocity", "action")

# directions accepted by convert()
SI_TO_SIM = "si_to_sim"
SIM_TO_SI = "sim_to_si"

_CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class UnitSystem:
    """Bridge between simulation units and SI.

    ``hbar`` and ``mass`` are the values of the reduced Planck constant and
    the atomic mass in simulation units.  The three scales say how many SI
    units one simulation unit is worth: ``length_scale`` in metres,
    ``time_scale`` in seconds, ``energy_scale`` in eV.  They are not
    independent: energy_scale * time_scale must equal hbar_SI / hbar so that
    the action unit is consistent.
    """

    hbar: float
    mass: float
    length_scale: float
    time_scale: float
    energy_scale: float

    def __post_init__(self):
        for name in ("hbar", "mass", "length_scale", "time_scale", "energy_scale"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"UnitSystem.{name} must be strictly positive")
        target = HBAR_EVS / self.hbar
        actual = self.energy_scale * self.time_scale
        if abs(actual - target) > _CONSISTENCY_RTOL * target:
            raise ValueError(
                "inconsistent unit scales: energy_scale*time_scale = "
                f"{actual:.12e} eV s but hbar requires {target:.12e} eV s"
            )

    @property
    def velocity_scale(self) -> float:
        """Metres per second per simulation velocity unit."""
        return self.length_scale / self.time_scale

    @property
    def action_scale(self) -> float:
        """eV seconds per simulation action unit."""
        return self.energy_scale * self.time_scale

    @classmethod
    def for_atom(cls, mass_kg: float = RB87_MASS_KG, length_m: float = 1e-6,
                 hbar: float = 1.0, mass: float = 1.0) -> "UnitSystem":
        """Natural units for one atomic species and a chosen length unit.

        With hbar = mass = 1 the time and energy scales follow from the SI
        atom mass and the metre value of the simulation length unit.
        """
        if mass_kg <= 0 or length_m <= 0:
            raise ValueError("atom mass and length unit must be positive")
        time_s = (mass_kg / mass) * length_m**2 / (HBAR_JS / hbar)
        energy_ev = HBAR_EVS / (hbar * time_s)
        return cls(hbar=hbar, mass=mass, length_scale=length_m,
                   time_scale=time_s, energy_scale=energy_ev)

    @classmethod
    def natural(cls) -> "UnitSystem":
        """Rubidium-87 with a 1 micron length unit; hbar = mass = 1."""
        return cls.for_atom()


def _scale_for(kind: str, units: UnitSystem) -> float:
    if kind == "length":
        return units.length_scale
    if kind == "time":
        return units.time_scale
    if kind == "energy":
        return units.energy_scale
    if kind == "velocity":
        return units.velocity_scale
    if kind == "action":
        return units.action_scale
    raise ValueError(f"unknown quantity kind {kind!r}; expected one of {QUANTITY_KINDS}")


def convert(value: float, quantity_kind: str, direction: str, units: UnitSystem) -> float:
    """Convert a scalar between simulation units and SI.

    SI units per kind: length in metres, time in seconds, energy in eV,
    velocity in m/s, action in eV s.
    """
    scale = _scale_for(quantity_kind, units)
    if direction == SIM_TO_SI:
        return value * scale
    if direction == SI_TO_SIM:
        return value / scale
    raise ValueError(f"unknown direction {direction!r}; expected {SI_TO_SIM!r} or {SIM_TO_SI!r}")
