"""Scenario configuration: flat dotted-key text, validated in one pass.

Format: one `key = value` per line, `#` starts a full-line comment, blank
lines are skipped.  Keys are dotted section names (grid.*, background.*,
waveform.*, evolution.*, linear.*, detect.*, ladder.*).  Lists are comma
separated.  Unknown keys are rejected with a nearest-match suggestion, and
validation reports every problem at once, not just the first.

`default_config_text()` prints the whole schema with defaults and one-line
help — that text is the authoritative key documentation.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from pathlib import Path

from . import waveforms
from .dynamics import stable_dt
from .errors import ConfigValidationError
from .grids import Grid
from .units import RB87_MASS_KG, UnitSystem

PIPELINES = ("nonlinear", "linear", "detectability", "cross_validate")
BACKGROUND_KINDS = (
    "homogeneous",
    "plane_flow",
    "vortex_pair",
    "vortex_checkerboard",
    "vortex_lattice",
)
SCHEMES = ("flat", "metric", "gauge")
LINEAR_FORMS = ("metric", "gauge")

_FALLBACK_STEPS = 200


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    return int(text, 0)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_str(text: str) -> str:
    return text


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part.strip(), 0) for part in text.split(",") if part.strip())


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part.strip()) for part in text.split(",") if part.strip())


@dataclass(frozen=True)
class _KeySpec:
    parse: callable
    default: object
    help: str
    choices: tuple[str, ...] | None = None


# the full schema; every key has a default, so a minimal config is tiny
SCHEMA: dict[str, _KeySpec] = {
    "name": _KeySpec(_parse_str, "scenario", "label used for the output directory"),
    "seed": _KeySpec(_parse_int, 0, "counter-based RNG seed for noise-seeded relaxation"),
    "pipeline": _KeySpec(_parse_str, "nonlinear", "which pipeline to run", PIPELINES),
    "outdir": _KeySpec(_parse_str, "", "output directory (empty -> runs/<name>)"),
    "overwrite": _KeySpec(_parse_bool, False, "allow writing into an existing directory"),

    "grid.points": _KeySpec(_parse_int_list, (64, 64), "samples per axis (1-3 axes, each >= 4)"),
    "grid.extents": _KeySpec(_parse_float_list, (16.0, 16.0), "periodic box lengths per axis"),

    "units.hbar": _KeySpec(_parse_float, 1.0, "hbar in simulation units"),
    "units.mass": _KeySpec(_parse_float, 1.0, "atom mass in simulation units"),
    "units.atom_mass_kg": _KeySpec(_parse_float, RB87_MASS_KG, "SI atom mass (default Rb-87)"),
    "units.length_m": _KeySpec(_parse_float, 1e-6, "metres per simulation length unit"),

    "background.kind": _KeySpec(_parse_str, "homogeneous", "initial condensate", BACKGROUND_KINDS),
    "background.rho0": _KeySpec(_parse_float, 1.0, "mean density"),
    "background.g": _KeySpec(_parse_float, 1.0, "contact coupling (>= 0)"),
    "background.modes": _KeySpec(_parse_int_list, (1, 0), "plane_flow winding numbers per axis"),
    "background.separation": _KeySpec(_parse_float, 0.0, "vortex_pair core distance (0 -> Lx/2)"),
    "background.omega": _KeySpec(_parse_float, 0.0, "vortex_lattice rotation rate (> 0)"),
    "background.trap_height": _KeySpec(_parse_float, 0.0, "lattice trap depth (0 -> auto)"),
    "background.relax_steps": _KeySpec(_parse_int, 12000, "imaginary-time step budget"),
    "background.relax_tol": _KeySpec(_parse_float, 1e-9, "relative energy change to stop at"),

    "waveform.kind": _KeySpec(_parse_str, "sinusoid", "strain signal type", waveforms.KINDS),
    "waveform.h_max": _KeySpec(_parse_float, 1e-3, "peak strain amplitude"),
    "waveform.frequency": _KeySpec(_parse_float, 1.0, "sinusoid/chirp frequency"),
    "waveform.phase": _KeySpec(_parse_float, 0.0, "sinusoid/chirp phase offset"),
    "waveform.center": _KeySpec(_parse_float, 0.0, "gaussian_pulse center time"),
    "waveform.width": _KeySpec(_parse_float, 0.0, "gaussian_pulse width"),
    "waveform.chirp_rate": _KeySpec(_parse_float, 0.0, "linear_chirp frequency slope"),
    "waveform.duration": _KeySpec(_parse_float, 0.0, "signal length (0 -> match evolution span)"),
    "waveform.file": _KeySpec(_parse_str, "", "CSV path for kind=tabulated (header t,h)"),

    "evolution.scheme": _KeySpec(_parse_str, "flat", "nonlinear stepping scheme", SCHEMES),
    "evolution.dt": _KeySpec(_parse_float, 0.0, "time step (0 -> stability heuristic)"),
    "evolution.n_steps": _KeySpec(_parse_int, 0, "step count (0 -> from duration)"),
    "evolution.duration": _KeySpec(_parse_float, 0.0, "span; alternative to n_steps"),
    "evolution.snapshot_stride": _KeySpec(_parse_int, 0, "save fields every k steps (0 -> ends only)"),
    "evolution.observable_stride": _KeySpec(_parse_int, 1, "record observables every k steps"),

    "linear.form": _KeySpec(_parse_str, "metric", "source-term form", LINEAR_FORMS),
    "linear.quantum_pressure": _KeySpec(_parse_bool, False, "keep the hbar^2 dispersion term"),
    "linear.dt": _KeySpec(_parse_float, 0.0, "linear step (0 -> CFL heuristic)"),
    "linear.n_steps": _KeySpec(_parse_int, 0, "linear step count (0 -> from duration)"),
    "linear.duration": _KeySpec(_parse_float, 0.0, "linear span; alternative to n_steps"),
    "linear.amplitude": _KeySpec(_parse_float, 0.0, "seed standing-wave amplitude (0 -> driven only)"),
    "linear.modes": _KeySpec(_parse_int_list, (1, 0), "seed/probe wavenumber indices per axis"),
    "linear.record_stride": _KeySpec(_parse_int, 1, "record linear series every k steps"),

    "detect.T": _KeySpec(_parse_float, 0.0, "integration time in seconds (0 -> trajectory span)"),
    "detect.N": _KeySpec(_parse_float, 1.0, "atom number"),
    "detect.n": _KeySpec(_parse_float, 0.0, "phonon number estimate"),
    "detect.E": _KeySpec(_parse_float, 0.0, "total energy in eV (detectability-only input)"),
    "detect.E_kin": _KeySpec(_parse_float, -1.0, "kinetic energy in eV (-1 -> same as detect.E)"),
    "detect.dVdh_max": _KeySpec(_parse_float, 0.0, "peak trap-strain coupling in eV"),

    "ladder.factors": _KeySpec(_parse_float_list, (1.0, 2.0, 4.0), "strain multipliers for scaling fits"),
}


def default_config_text() -> str:
    """Commented template listing every key, its default, and what it does."""
    lines = ["# scenario config: key = value, dotted sections, '#' comments"]
    section = None
    for key, spec in SCHEMA.items():
        head = key.split(".")[0] if "." in key else ""
        if head != section:
            section = head
            lines.append("")
        default = spec.default
        if isinstance(default, tuple):
            default = ",".join(str(v) for v in default)
        note = spec.help
        if spec.choices:
            note += f" [{'|'.join(spec.choices)}]"
        lines.append(f"# {note}")
        lines.append(f"{key} = {default}")
    return "\n".join(lines) + "\n"


@dataclass
class ScenarioConfig:
    """Validated scenario: typed values plus the built grid/units/waveform."""

    name: str
    seed: int
    pipeline: str
    outdir: str
    overwrite: bool
    grid: Grid
    units: UnitSystem
    background: dict
    waveform: waveforms.StrainWaveform | None
    evolution: dict
    linear: dict
    detect: dict
    ladder_factors: tuple[float, ...]
    resolved: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def output_dir(self) -> str:
        return self.outdir or f"runs/{self.name}"


def _suggest(key: str) -> str:
    """Nearest schema key for a typo, matching both full names and leaves."""
    candidates: dict[str, str] = {}
    for known in SCHEMA:
        candidates[known] = known
        if "." in known:
            candidates.setdefault(known.split(".", 1)[1], known)
    hits = difflib.get_close_matches(key, candidates.keys(), n=1, cutoff=0.4)
    if not hits:
        return ""
    return candidates[hits[0]]


def _parse_pairs(text: str, errors: list[str]) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        if key in pairs:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        if key not in SCHEMA:
            hint = _suggest(key)
            suffix = f"; did you mean {hint!r}?" if hint else ""
            errors.append(f"line {lineno}: unknown key {key!r}{suffix}")
            continue
        pairs[key] = value
    return pairs


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate; raises ConfigValidationError with ALL problems."""
    errors: list[str] = []
    warnings: list[str] = []
    pairs = _parse_pairs(text, errors)

    values: dict[str, object] = {}
    for key, spec in SCHEMA.items():
        if key not in pairs:
            values[key] = spec.default
            continue
        try:
            parsed = spec.parse(pairs[key])
        except ValueError as exc:
            errors.append(f"{key}: cannot parse {pairs[key]!r} ({exc})")
            values[key] = spec.default
            continue
        if spec.choices and parsed not in spec.choices:
            errors.append(f"{key}: {parsed!r} is not one of {'|'.join(spec.choices)}")
        values[key] = parsed

    # --- grid -----------------------------------------------------------
    points = values["grid.points"]
    extents = values["grid.extents"]
    grid = None
    if len(points) != len(extents):
        errors.append(
            f"grid.points has {len(points)} axes but grid.extents has {len(extents)}"
        )
    else:
        try:
            grid = Grid(extents=extents, points=points)
        except ValueError as exc:
            errors.append(f"grid: {exc}")
    for n in points:
        if not _is_power_of_two(n):
            warnings.append(
                f"grid.points includes {n}, not a power of two; FFTs will be slower"
            )

    # --- units ------------------------------------------------------------
    units = None
    try:
        units = UnitSystem.for_atom(
            mass_kg=values["units.atom_mass_kg"],
            length_m=values["units.length_m"],
            hbar=values["units.hbar"],
            mass=values["units.mass"],
        )
    except ValueError as exc:
        errors.append(f"units: {exc}")

    # --- background -------------------------------------------------------
    kind = values["background.kind"]
    if values["background.rho0"] <= 0:
        errors.append("background.rho0 must be positive")
    if values["background.g"] < 0:
        errors.append("background.g must be nonnegative")
    if grid is not None:
        if kind == "plane_flow" and len(values["background.modes"]) != grid.dim:
            errors.append(
                f"background.modes needs one integer per axis "
                f"({grid.dim} axes, got {len(values['background.modes'])})"
            )
        if kind.startswith("vortex") and grid.dim != 2:
            errors.append(f"background.kind {kind!r} needs a 2-axis grid")
    if kind == "vortex_lattice" and values["background.omega"] <= 0:
        errors.append("background.kind 'vortex_lattice' requires background.omega > 0")
    if values["background.relax_steps"] < 1:
        errors.append("background.relax_steps must be at least 1")

    # --- evolution timing ---------------------------------------------------
    pipeline = values["pipeline"]
    dt = values["evolution.dt"]
    if dt < 0:
        errors.append("evolution.dt must be nonnegative (0 = auto)")
        dt = 0.0
    if dt == 0.0 and grid is not None and units is not None:
        dt = stable_dt(grid, units)
    n_steps = values["evolution.n_steps"]
    duration = values["evolution.duration"]
    if n_steps and duration:
        errors.append(
            "give evolution.n_steps or evolution.duration, not both "
            f"(got {n_steps} and {duration:g})"
        )
    if n_steps < 0 or duration < 0:
        errors.append("evolution.n_steps and evolution.duration must be nonnegative")
    if not n_steps:
        n_steps = max(1, round(duration / dt)) if (duration and dt) else _FALLBACK_STEPS
    span = n_steps * dt
    if values["evolution.observable_stride"] < 1:
        errors.append("evolution.observable_stride must be at least 1")
    if values["evolution.snapshot_stride"] < 0:
        errors.append("evolution.snapshot_stride must be nonnegative")
    evolution = {
        "scheme": values["evolution.scheme"],
        "dt": dt,
        "n_steps": n_steps,
        "span": span,
        "snapshot_stride": values["evolution.snapshot_stride"],
        "observable_stride": values["evolution.observable_stride"],
    }

    # --- linear timing ------------------------------------------------------
    l_steps = values["linear.n_steps"]
    l_duration = values["linear.duration"]
    if l_steps and l_duration:
        errors.append(
            "give linear.n_steps or linear.duration, not both "
            f"(got {l_steps} and {l_duration:g})"
        )
    if values["linear.record_stride"] < 1:
        errors.append("linear.record_stride must be at least 1")
    linear = {
        "form": values["linear.form"],
        "quantum_pressure": values["linear.quantum_pressure"],
        "dt": values["linear.dt"],  # 0 = CFL heuristic, needs the background
        "n_steps": l_steps,
        "duration": l_duration,
        "amplitude": values["linear.amplitude"],
        "modes": values["linear.modes"],
        "record_stride": values["linear.record_stride"],
    }
    if grid is not None and len(linear["modes"]) != grid.dim:
        errors.append(
            f"linear.modes needs one integer per axis "
            f"({grid.dim} axes, got {len(linear['modes'])})"
        )

    # --- waveform -----------------------------------------------------------
    needs_waveform = (
        evolution["scheme"] in ("metric", "gauge")
        or pipeline in ("linear", "cross_validate", "detectability")
    )
    waveform = None
    if needs_waveform:
        w_duration = values["waveform.duration"]
        if w_duration == 0.0:
            # long enough for whichever leg runs; linear dt is resolved later,
            # so fall back to the nonlinear span and the detect window
            w_duration = max(span, l_duration, values["detect.T"], 1e-30)
        else:
            if w_duration < span and pipeline in ("nonlinear", "cross_validate"):
                errors.append(
                    f"waveform.duration {w_duration:g} is shorter than the evolution "
                    f"span {span:g} (= evolution.dt * evolution.n_steps)"
                )
            linear_span = linear["dt"] * l_steps
            if linear_span and w_duration < linear_span and pipeline in ("linear", "cross_validate"):
                errors.append(
                    f"waveform.duration {w_duration:g} is shorter than the linear "
                    f"span {linear_span:g} (= linear.dt * linear.n_steps)"
                )
        try:
            if values["waveform.kind"] == "tabulated":
                if not values["waveform.file"]:
                    errors.append("waveform.kind 'tabulated' requires waveform.file")
                else:
                    waveform = waveforms.load_tabulated_csv(values["waveform.file"])
                    if "waveform.h_max" in pairs:
                        waveform = waveform.rescaled(values["waveform.h_max"])
            else:
                params = {
                    "h_max": values["waveform.h_max"],
                    "duration": w_duration,
                }
                if values["waveform.kind"] in ("sinusoid", "linear_chirp"):
                    params["frequency"] = values["waveform.frequency"]
                    params["phase"] = values["waveform.phase"]
                if values["waveform.kind"] == "linear_chirp":
                    params["chirp_rate"] = values["waveform.chirp_rate"]
                if values["waveform.kind"] == "gaussian_pulse":
                    params["center"] = values["waveform.center"]
                    params["width"] = values["waveform.width"]
                waveform = waveforms.make_waveform(values["waveform.kind"], **params)
        except (ValueError, OSError) as exc:
            errors.append(f"waveform: {exc}")

    # --- detect ---------------------------------------------------------------
    detect = {
        "T": values["detect.T"],
        "N": values["detect.N"],
        "n": values["detect.n"],
        "E": values["detect.E"],
        "E_kin": values["detect.E_kin"] if values["detect.E_kin"] >= 0 else values["detect.E"],
        "dVdh_max": values["detect.dVdh_max"],
    }
    if detect["T"] < 0:
        errors.append("detect.T must be nonnegative")
    if detect["N"] < 1:
        errors.append("detect.N must be at least 1")
    if detect["n"] < 0:
        errors.append("detect.n must be nonnegative")
    if detect["n"] > detect["N"]:
        errors.append(f"detect.n ({detect['n']:g}) cannot exceed detect.N ({detect['N']:g})")
    if pipeline == "detectability":
        missing = [k for k in ("detect.T", "detect.E") if values[k] <= 0]
        if missing:
            errors.append(
                "pipeline 'detectability' needs positive " + " and ".join(missing)
            )
    if detect["E"] > 0 and not 0 <= detect["E_kin"] <= detect["E"]:
        errors.append(
            f"detect.E_kin ({detect['E_kin']:g}) must lie in [0, detect.E = {detect['E']:g}]"
        )

    # --- ladder ---------------------------------------------------------------
    factors = values["ladder.factors"]
    if pipeline == "cross_validate":
        if len(factors) < 2:
            errors.append("ladder.factors needs at least 2 entries for a scaling fit")
        if any(f <= 0 for f in factors):
            errors.append("ladder.factors must all be positive")
        if len(set(factors)) != len(factors):
            errors.append("ladder.factors must be distinct")

    if values["seed"] < 0:
        errors.append("seed must be nonnegative")

    if errors:
        raise ConfigValidationError(errors)

    resolved = dict(values)
    resolved["evolution.dt"] = dt
    resolved["evolution.n_steps"] = n_steps
    if waveform is not None:
        resolved["waveform.duration_auto"] = values["waveform.duration"] == 0.0
        resolved["waveform.duration"] = waveform.duration
        resolved["waveform.h_max"] = waveform.h_max
    resolved["detect.E_kin"] = detect["E_kin"]

    return ScenarioConfig(
        name=values["name"],
        seed=values["seed"],
        pipeline=pipeline,
        outdir=values["outdir"],
        overwrite=values["overwrite"],
        grid=grid,
        units=units,
        background={
            "kind": kind,
            "rho0": values["background.rho0"],
            "g": values["background.g"],
            "modes": values["background.modes"],
            "separation": values["background.separation"],
            "omega": values["background.omega"],
            "trap_height": values["background.trap_height"],
            "relax_steps": values["background.relax_steps"],
            "relax_tol": values["background.relax_tol"],
        },
        waveform=waveform,
        evolution=evolution,
        linear=linear,
        detect=detect,
        ladder_factors=tuple(factors),
        resolved=resolved,
        warnings=warnings,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())
