"""Scenario execution: prepare the background, drive it, persist artifacts.

One scenario owns one output directory.  A manifest is written before any
heavy work starts and rewritten at the end, so a crashed run always leaves
a manifest naming the failed stage; partial artifacts never appear without
one.  All floats in CSV output are %.17g (shortest exact round-trip), which
is what makes rerun-identical configs produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import condensate, detect, dynamics, fieldio, phonons, waveforms
from ._version import VERSION
from .config import ScenarioConfig
from .errors import ConfigValidationError
from .grids import Field

CSV_FLOAT = "%.17g"
_FALLBACK_STEPS = 200

OBSERVABLE_COLUMNS = ("t", "N", "E_kin", "E_int", "E_pot", "E_total", "Q", "Lz")
LINEAR_COLUMNS = ("t", "delta_N", "energy", "amplitude")


def _fmt(value: float) -> str:
    return CSV_FLOAT % value


def observables_csv(trajectory: dynamics.Trajectory) -> str:
    lines = [",".join(OBSERVABLE_COLUMNS)]
    for obs in trajectory.observables:
        lines.append(",".join(_fmt(getattr(obs, c)) for c in OBSERVABLE_COLUMNS))
    return "\n".join(lines) + "\n"


def linear_csv(traj: phonons.LinearTrajectory) -> str:
    lines = [",".join(LINEAR_COLUMNS)]
    for t, n, e, a in zip(traj.times, traj.number, traj.energy, traj.amplitude):
        lines.append(",".join(_fmt(v) for v in (t, n, e, a)))
    return "\n".join(lines) + "\n"


def waveform_csv(waveform: waveforms.StrainWaveform, n_samples: int = 512) -> str:
    ts = np.linspace(0.0, waveform.duration, n_samples)
    h, _, _ = waveforms.sample(waveform, ts)
    lines = ["t,h"]
    for t, v in zip(ts, h):
        lines.append(f"{_fmt(t)},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x (scaling-exponent fit)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise ValueError("need at least two points for a slope")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs positive data")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@dataclass
class PreparedBackground:
    state: condensate.CondensateState
    potential: Field | None
    info: dict


def prepare_background(cfg: ScenarioConfig) -> PreparedBackground:
    bg = cfg.background
    grid, units = cfg.grid, cfg.units
    kind = bg["kind"]
    info: dict = {"kind": kind}

    if kind == "homogeneous":
        state = condensate.prepare_homogeneous(grid, bg["rho0"], bg["g"], units)
        return PreparedBackground(state, None, info)
    if kind == "plane_flow":
        state = condensate.prepare_plane_wave(grid, bg["rho0"], bg["modes"], bg["g"], units)
        info["modes"] = list(bg["modes"])
        return PreparedBackground(state, None, info)
    if kind == "vortex_pair":
        separation = bg["separation"] or None
        state = condensate.prepare_vortex_pair(grid, bg["rho0"], bg["g"], units, separation)
        info["separation"] = separation if separation else 0.5 * grid.extents[0]
        return PreparedBackground(state, None, info)
    if kind == "vortex_checkerboard":
        state = condensate.prepare_vortex_checkerboard(grid, bg["rho0"], bg["g"], units)
        return PreparedBackground(state, None, info)

    # vortex_lattice: seeded rotating relaxation inside a flat-bottomed well
    result = condensate.prepare_vortex_lattice(
        grid,
        bg["omega"],
        bg["g"],
        bg["rho0"],
        units,
        seed=cfg.seed,
        max_steps=bg["relax_steps"],
        tol=bg["relax_tol"],
        trap_height=bg["trap_height"] or None,
    )
    potential = condensate.lattice_trap_potential(
        grid, bg["omega"], units, bg["trap_height"] or None, g=bg["g"], rho0=bg["rho0"]
    )
    rho = np.abs(result.state.psi.values) ** 2
    rho_max = float(rho.max())
    sightings = condensate.vortex_census(
        result.state, rho_cut=condensate.CENSUS_VACUUM_FRACTION * rho_max
    )
    dv = grid.cell_volume
    area_part = float((rho.sum() * dv) ** 2 / (np.sum(rho**2) * dv))
    info.update(
        omega=bg["omega"],
        converged=result.converged,
        relax_steps=result.steps,
        relax_residual=result.residual,
        relax_energy=result.energy,
        monotonic=result.monotonic,
        vortex_count=len(sightings),
        participation_area=area_part,
        feynman_estimate=condensate.feynman_vortex_count(
            bg["omega"], area_part, units.mass, units.hbar
        ),
    )
    info["census_csv"] = condensate.census_to_csv(sightings)
    return PreparedBackground(result.state, potential, info)


def _save_snapshots(outdir: Path, trajectory: dynamics.Trajectory) -> list[str]:
    fields_dir = outdir / "fields"
    fields_dir.mkdir(exist_ok=True)
    stems = []
    for i, snap in enumerate(trajectory.snapshots):
        stem = fields_dir / f"psi_{i:06d}"
        fieldio.save_field(stem, snap.psi, name="psi", time=snap.t)
        stems.append(str(stem.relative_to(outdir)))
    return stems


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _versions() -> dict:
    import scipy

    return {
        "gwbec": VERSION,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": sys.version.split()[0],
    }


class _Manifest:
    """Written before heavy work, rewritten on completion or failure."""

    def __init__(self, outdir: Path, cfg: ScenarioConfig):
        self.path = outdir / "manifest.json"
        self.payload = {
            "name": cfg.name,
            "pipeline": cfg.pipeline,
            "seed": cfg.seed,
            "status": "running",
            "failed_stage": None,
            "error": None,
            "config": {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.resolved.items()},
            "versions": _versions(),
            "warnings": list(cfg.warnings),
            "artifacts": [],
            "stages": [],
        }
        self.write()

    def write(self):
        self.path.write_text(_json_text(self.payload))

    def stage_done(self, stage: str):
        self.payload["stages"].append(stage)
        self.write()

    def add_artifact(self, name: str):
        self.payload["artifacts"].append(name)

    def warn(self, message: str):
        self.payload["warnings"].append(message)

    def complete(self):
        self.payload["status"] = "complete"
        self.write()

    def fail(self, stage: str, error: Exception):
        self.payload["status"] = "failed"
        self.payload["failed_stage"] = stage
        self.payload["error"] = f"{type(error).__name__}: {error}"
        self.write()


def _resolve_linear_timing(cfg: ScenarioConfig, bg_flow: phonons.BackgroundFlow):
    lin = cfg.linear
    dt = lin["dt"] or phonons.stable_dt_linear(bg_flow, lin["quantum_pressure"])
    if lin["n_steps"]:
        n_steps = lin["n_steps"]
    elif lin["duration"]:
        n_steps = max(1, round(lin["duration"] / dt))
    else:
        n_steps = _FALLBACK_STEPS
    return dt, n_steps


def _fit_waveform(cfg: ScenarioConfig, span: float) -> waveforms.StrainWaveform:
    """Waveform covering the resolved span; auto durations stretch to fit."""
    wf = cfg.waveform
    if wf.duration * (1.0 + 1e-9) >= span:
        return wf
    if not cfg.resolved.get("waveform.duration_auto", True):
        raise ConfigValidationError(
            [
                f"waveform.duration {wf.duration:g} is shorter than the resolved "
                f"span {span:g}"
            ]
        )
    if wf.kind == "tabulated":
        raise ConfigValidationError(
            [f"tabulated waveform ends at {wf.duration:g} but the span is {span:g}"]
        )
    params = {"h_max": wf.h_max, "duration": span}
    if wf.kind in ("sinusoid", "linear_chirp"):
        params["frequency"] = wf.frequency
        params["phase"] = wf.phase
    if wf.kind == "linear_chirp":
        params["chirp_rate"] = wf.chirp_rate
    if wf.kind == "gaussian_pulse":
        params["center"] = wf.center
        params["width"] = wf.width
    return waveforms.make_waveform(wf.kind, **params)


def _drive_periods(cfg: ScenarioConfig) -> tuple[float, int]:
    """Integer-period span for frame comparisons (strain back at zero).

    The scaling-ansatz frame coincides with the lab frame only where h = 0,
    so metric/gauge runs are compared after whole drive periods.
    """
    wf = cfg.waveform
    if wf.kind != "sinusoid" or wf.phase != 0.0:
        raise ConfigValidationError(
            ["cross_validate compares frames where the strain returns to zero; "
             "use waveform.kind = sinusoid with waveform.phase = 0"]
        )
    dt = cfg.evolution["dt"]
    span_hint = cfg.evolution["span"]
    periods = max(1, round(span_hint * wf.frequency))
    duration = periods / wf.frequency
    n_steps = max(1, round(duration / dt))
    return duration / n_steps, n_steps


# --- pipelines ---------------------------------------------------------------


def _pipeline_nonlinear(cfg: ScenarioConfig, outdir: Path, manifest: _Manifest):
    prep = prepare_background(cfg)
    manifest.payload["background"] = {
        k: v for k, v in prep.info.items() if k != "census_csv"
    }
    if "census_csv" in prep.info:
        (outdir / "vortices.csv").write_text(prep.info["census_csv"])
        manifest.add_artifact("vortices.csv")
    manifest.stage_done("prepare")

    scheme = cfg.evolution["scheme"]
    wf = None
    if scheme in ("metric", "gauge"):
        wf = _fit_waveform(cfg, cfg.evolution["span"])
    evo = dynamics.EvolutionConfig(
        dt=cfg.evolution["dt"],
        n_steps=cfg.evolution["n_steps"],
        scheme=scheme,
        waveform=wf,
        potential=prep.potential,
        snapshot_stride=cfg.evolution["snapshot_stride"],
        observable_stride=cfg.evolution["observable_stride"],
    )
    trajectory = dynamics.evolve(prep.state, evo)
    manifest.stage_done("evolve")

    (outdir / "observables.csv").write_text(observables_csv(trajectory))
    manifest.add_artifact("observables.csv")
    for stem in _save_snapshots(outdir, trajectory):
        manifest.add_artifact(stem)
    if wf is not None:
        (outdir / "waveform.csv").write_text(waveform_csv(wf))
        manifest.add_artifact("waveform.csv")

    if wf is not None:
        # phi uses the flat reference trajectory's Q(t) (first-order theory);
        # the strained trajectory's own Q gives an O(h^2) self-consistency check
        reference = dynamics.evolve(
            prep.state,
            dynamics.EvolutionConfig(
                dt=cfg.evolution["dt"],
                n_steps=cfg.evolution["n_steps"],
                scheme="flat",
                potential=prep.potential,
                observable_stride=cfg.evolution["observable_stride"],
            ),
        )
        scenario, phi = detect.scenario_from_trajectory(
            reference,
            wf,
            cfg.units,
            n_phonons=cfg.detect["n"],
            n_source="config",
            dVdh_max=cfg.detect["dVdh_max"],
        )
        if cfg.detect["N"] > 1:
            scenario = dataclasses.replace(scenario, N=cfg.detect["N"])
        report = detect.build_report(scenario, phi)
        phi_strained = detect.quadrupole_phase_shift(
            trajectory.times, trajectory.series("Q"), wf, cfg.units.hbar
        )
        notes = []
        if cfg.background["kind"] == "homogeneous":
            notes.append(
                "no direct phonon creation: the strain source terms vanish on a "
                "homogeneous background, and Q(t) stays zero"
            )
        payload = json.loads(report.to_json())
        payload["extras"] = {
            "phi_strained_Q": phi_strained,
            "phi_frame_difference": phi_strained - report.phi,
        }
        payload["notes"] = notes
        (outdir / "detection_report.json").write_text(_json_text(payload))
        manifest.add_artifact("detection_report.json")
    manifest.stage_done("detect")


def _pipeline_linear(cfg: ScenarioConfig, outdir: Path, manifest: _Manifest):
    prep = prepare_background(cfg)
    manifest.payload["background"] = {
        k: v for k, v in prep.info.items() if k != "census_csv"
    }
    if "census_csv" in prep.info:
        (outdir / "vortices.csv").write_text(prep.info["census_csv"])
        manifest.add_artifact("vortices.csv")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", phonons.BackgroundResidualWarning)
        bg_flow = phonons.background_from(prep.state, prep.potential)
    for w in caught:
        manifest.warn(str(w.message))
    manifest.stage_done("prepare")

    dt, n_steps = _resolve_linear_timing(cfg, bg_flow)
    wf = _fit_waveform(cfg, dt * n_steps)
    lin = cfg.linear
    seed = phonons.make_standing_wave(bg_flow, lin["amplitude"], lin["modes"])
    ltraj = phonons.evolve_linear(
        seed,
        bg_flow,
        dt,
        n_steps,
        waveform=wf,
        form=lin["form"],
        quantum_pressure=lin["quantum_pressure"],
        record_stride=lin["record_stride"],
        probe_mode=lin["modes"],
    )
    manifest.stage_done("linear")

    (outdir / "observables.csv").write_text(linear_csv(ltraj))
    manifest.add_artifact("observables.csv")
    (outdir / "waveform.csv").write_text(waveform_csv(wf))
    manifest.add_artifact("waveform.csv")
    fields_dir = outdir / "fields"
    fields_dir.mkdir(exist_ok=True)
    fieldio.save_field(fields_dir / "drho_final", ltraj.final.drho, "drho", ltraj.final.t)
    fieldio.save_field(fields_dir / "dS_final", ltraj.final.dS, "dS", ltraj.final.t)
    manifest.add_artifact("fields/drho_final")
    manifest.add_artifact("fields/dS_final")

    content = phonons.phonon_content(ltraj.final, bg_flow, lin["quantum_pressure"])
    (outdir / "phonons.json").write_text(
        _json_text(
            {
                "n_est": content.n_est,
                "basis": content.basis,
                "n_modes": len(content.modes),
                "source_form": lin["form"],
                "background_residuals": bg_flow.residual_report,
            }
        )
    )
    manifest.add_artifact("phonons.json")
    (outdir / "phonon_modes.csv").write_text(content.to_csv())
    manifest.add_artifact("phonon_modes.csv")

    if cfg.detect["T"] > 0 and cfg.detect["E"] > 0:
        # the simulated box is a small stand-in for the physical cloud:
        # phonon number is extensive, so rescale by the atom-number ratio
        n_sim_atoms = float(np.real(np.sum(np.abs(prep.state.psi.values) ** 2))
                            * cfg.grid.cell_volume)
        n_scaled = content.n_est * cfg.detect["N"] / n_sim_atoms
        flags = []
        if n_scaled > cfg.detect["N"]:
            n_scaled = cfg.detect["N"]
            flags.append("phonon_estimate_saturated: n capped at N")
        scenario = detect.DetectionScenario(
            waveform=wf,
            T=cfg.detect["T"],
            N=cfg.detect["N"],
            n=n_scaled,
            E_total=cfg.detect["E"],
            E_kin=cfg.detect["E_kin"],
            dVdh_max=cfg.detect["dVdh_max"],
            n_source="linear-response",
            units=cfg.units,
        )
        report = detect.build_report(scenario, 0.0)
        payload = json.loads(report.to_json())
        payload["notes"] = [
            "phi requires a nonlinear trajectory; the linear pipeline reports "
            "bounds and phonon content only"
        ]
        payload["flags"] = list(payload["flags"]) + flags
        payload["extras"] = {"n_sim": content.n_est, "n_sim_atoms": n_sim_atoms}
        (outdir / "detection_report.json").write_text(_json_text(payload))
        manifest.add_artifact("detection_report.json")
    manifest.stage_done("detect")


def _pipeline_detectability(cfg: ScenarioConfig, outdir: Path, manifest: _Manifest):
    scenario = detect.DetectionScenario(
        waveform=cfg.waveform,
        T=cfg.detect["T"],
        N=cfg.detect["N"],
        n=cfg.detect["n"],
        E_total=cfg.detect["E"],
        E_kin=cfg.detect["E_kin"],
        dVdh_max=cfg.detect["dVdh_max"],
        n_source="config",
    )
    report = detect.build_report(scenario, 0.0)
    payload = json.loads(report.to_json())
    payload["notes"] = ["no trajectory: phi not evaluated, bounds and scalings only"]
    (outdir / "detection_report.json").write_text(_json_text(payload))
    manifest.add_artifact("detection_report.json")

    # a stub observables.csv keeps the artifact contract uniform
    (outdir / "observables.csv").write_text(",".join(OBSERVABLE_COLUMNS) + "\n")
    manifest.add_artifact("observables.csv")
    manifest.stage_done("detect")


def _pipeline_cross_validate(cfg: ScenarioConfig, outdir: Path, manifest: _Manifest):
    prep = prepare_background(cfg)
    manifest.payload["background"] = {
        k: v for k, v in prep.info.items() if k != "census_csv"
    }
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", phonons.BackgroundResidualWarning)
        bg_flow = phonons.background_from(prep.state, prep.potential)
    for w in caught:
        manifest.warn(str(w.message))
    manifest.stage_done("prepare")

    dt, n_steps = _drive_periods(cfg)
    base = _fit_waveform(cfg, dt * n_steps)
    lin_dt, lin_steps = _resolve_linear_timing(cfg, bg_flow)
    lin_wf_base = _fit_waveform(cfg, lin_dt * lin_steps)
    lin = cfg.linear

    h_values, amplitudes, n_estimates, scheme_q_gaps = [], [], [], []
    base_trajectory = None

    for factor in cfg.ladder_factors:
        h = factor * base.h_max
        h_values.append(h)

        ltraj = phonons.evolve_linear(
            phonons.make_standing_wave(bg_flow, 0.0, lin["modes"]),
            bg_flow,
            lin_dt,
            lin_steps,
            waveform=lin_wf_base.rescaled(h),
            form=lin["form"],
            quantum_pressure=lin["quantum_pressure"],
            record_stride=max(1, lin_steps // 64),
        )
        amplitudes.append(float(np.max(ltraj.amplitude)))
        content = phonons.phonon_content(ltraj.final, bg_flow, lin["quantum_pressure"])
        n_estimates.append(content.n_est)

        wf_h = base.rescaled(h)
        runs = {}
        for scheme in ("metric", "gauge"):
            evo = dynamics.EvolutionConfig(
                dt=dt,
                n_steps=n_steps,
                scheme=scheme,
                waveform=wf_h,
                potential=prep.potential,
                observable_stride=max(1, n_steps // 256),
            )
            runs[scheme] = dynamics.evolve(prep.state, evo)
        q_m = runs["metric"].observables[-1].Q
        q_g = runs["gauge"].observables[-1].Q
        scheme_q_gaps.append(abs(q_m - q_g))
        if factor == cfg.ladder_factors[0]:
            base_trajectory = runs["metric"]
    manifest.stage_done("cross_validate")

    slopes = {
        "amplitude_vs_h": fit_loglog_slope(h_values, amplitudes),
        "phonons_vs_h": fit_loglog_slope(h_values, n_estimates),
        "scheme_q_gap_vs_h": fit_loglog_slope(h_values, scheme_q_gaps),
    }
    lines = ["h,amplitude,n_est,scheme_q_gap"]
    for row in zip(h_values, amplitudes, n_estimates, scheme_q_gaps):
        lines.append(",".join(_fmt(v) for v in row))
    (outdir / "scaling.csv").write_text("\n".join(lines) + "\n")
    manifest.add_artifact("scaling.csv")
    (outdir / "cross_validate.json").write_text(
        _json_text(
            {
                "slopes": slopes,
                "h_values": h_values,
                "comparison_time": dt * n_steps,
                "drive_periods": round(dt * n_steps * base.frequency),
                "note": (
                    "schemes compared through the quadrupole observable after "
                    "whole drive periods, where h = 0; raw wavefunctions keep a "
                    "first-order box-seam mismatch (the two forms periodize in "
                    "different coordinates), so the equivalence contract lives "
                    "in observables"
                ),
            }
        )
    )
    manifest.add_artifact("cross_validate.json")
    (outdir / "observables.csv").write_text(observables_csv(base_trajectory))
    manifest.add_artifact("observables.csv")
    (outdir / "waveform.csv").write_text(waveform_csv(base))
    manifest.add_artifact("waveform.csv")
    manifest.stage_done("persist")


_PIPELINES = {
    "nonlinear": _pipeline_nonlinear,
    "linear": _pipeline_linear,
    "detectability": _pipeline_detectability,
    "cross_validate": _pipeline_cross_validate,
}


def run_scenario(cfg: ScenarioConfig, outdir: str | Path | None = None,
                 overwrite: bool | None = None) -> Path:
    """Execute the configured pipeline; returns the artifact directory.

    Raises ConfigValidationError / EvolutionAbort / InvariantViolation on
    the corresponding failures; the manifest names the stage that died.
    """
    target = Path(outdir) if outdir is not None else Path(cfg.output_dir)
    allow = cfg.overwrite if overwrite is None else overwrite
    if target.exists() and any(target.iterdir()) and not allow:
        raise FileExistsError(
            f"output directory {target} is not empty; pass overwrite to reuse it"
        )
    target.mkdir(parents=True, exist_ok=True)

    manifest = _Manifest(target, cfg)
    stage = "setup"
    try:
        stage = cfg.pipeline
        _PIPELINES[cfg.pipeline](cfg, target, manifest)
        stage = "plot"
        emit_plot_script(target)
        manifest.add_artifact("plot.py")
        manifest.complete()
    except BaseException as exc:
        manifest.fail(stage, exc if isinstance(exc, Exception) else RuntimeError(repr(exc)))
        raise
    return target


# --- plot script -------------------------------------------------------------

_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Render the artifacts in this directory; self-contained (numpy + matplotlib)."""

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).resolve().parent


def read_csv(name):
    with open(HERE / name, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    if not data:
        return header, None
    return header, np.array([[float(v) for v in row] for row in data])


def load_field(stem):
    meta = json.loads((HERE / (str(stem) + ".json")).read_text())
    raw = np.fromfile(HERE / (str(stem) + ".bin"), dtype=np.dtype(meta["dtype"]))
    return meta, raw.reshape(meta["points"])


panels = []
header, obs = read_csv("observables.csv")
if obs is not None:
    t = obs[:, 0]
    for column in ("Q", "amplitude"):
        if column in header:
            panels.append((column + "(t)", t, obs[:, header.index(column)]))

if (HERE / "waveform.csv").exists():
    _, wave = read_csv("waveform.csv")
    if wave is not None:
        panels.append(("h(t)", wave[:, 0], wave[:, 1]))

snapshots = sorted(HERE.glob("fields/*.json"))
scaling = (HERE / "scaling.csv").exists()
n_axes = len(panels) + min(len(snapshots), 2) + (1 if scaling else 0)
if n_axes == 0:
    raise SystemExit("nothing to plot")

fig, axes = plt.subplots(1, n_axes, figsize=(4.5 * n_axes, 3.6))
axes = np.atleast_1d(axes)
k = 0
for title, x, y in panels:
    axes[k].plot(x, y, lw=1.0)
    axes[k].set_title(title)
    axes[k].set_xlabel("t")
    k += 1

for stem in snapshots[-2:]:
    meta, values = load_field(stem.with_suffix(""))
    if values.ndim != 2:
        continue
    shown = np.abs(values) ** 2 if np.iscomplexobj(values) else values
    im = axes[k].imshow(shown.T, origin="lower", extent=(0, 1, 0, 1), aspect="auto")
    axes[k].set_title(f"{meta['name']} @ t={meta['time']:.3g}")
    fig.colorbar(im, ax=axes[k])
    k += 1

if scaling:
    _, data = read_csv("scaling.csv")
    h = data[:, 0]
    for j, label in ((1, "amplitude"), (2, "n_est"), (3, "scheme Q gap")):
        y = data[:, j]
        if np.all(y > 0):
            slope = np.polyfit(np.log(h), np.log(y), 1)[0]
            axes[k].loglog(h, y, "o-", label=f"{label} (slope {slope:.2f})")
    axes[k].set_xlabel("h")
    axes[k].set_title("scaling vs strain")
    axes[k].legend(fontsize=7)
    k += 1

fig.tight_layout()
fig.savefig(HERE / "plots.png", dpi=150)
print(f"wrote {HERE / 'plots.png'}")
'''


def emit_plot_script(artifact_dir: str | Path) -> Path:
    """Write a self-contained plot script next to the artifacts."""
    artifact_dir = Path(artifact_dir)
    expected = ["observables.csv"]
    missing = [name for name in expected if not (artifact_dir / name).exists()]
    if missing:
        raise FileNotFoundError(
            f"{artifact_dir} is missing expected artifacts: {', '.join(missing)}"
        )
    path = artifact_dir / "plot.py"
    path.write_text(_PLOT_TEMPLATE)
    return path
