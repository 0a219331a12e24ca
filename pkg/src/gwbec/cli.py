"""Command-line entry point.

Commands: run, sweep, validate, plot, bounds.  Exit codes: 0 success,
1 validation failure, 2 runtime failure, 3 invariant violation (a bug —
e.g. a phase shift exceeding its analytic bound — not a physics result).
The only environment variable consulted is GWBEC_THREADS (sweep width).
"""

from __future__ import annotations

import argparse
import glob as globlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import detect, runner, waveforms
from ._version import VERSION
from .config import default_config_text, load_config
from .errors import ConfigValidationError, EvolutionAbort, GwbecError, InvariantViolation

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_INVARIANT = 3


def _classify(exc: Exception) -> int:
    if isinstance(exc, ConfigValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, InvariantViolation):
        return EXIT_INVARIANT
    if isinstance(exc, (EvolutionAbort, GwbecError, OSError, ValueError)):
        return EXIT_RUNTIME
    raise exc


def _report(exc: Exception) -> int:
    code = _classify(exc)
    if isinstance(exc, ConfigValidationError):
        print(f"config invalid ({len(exc.errors)} problem(s)):", file=sys.stderr)
        for err in exc.errors:
            print(f"  - {err}", file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)
    return code


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    for warning in cfg.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    outdir = runner.run_scenario(cfg, outdir=args.outdir, overwrite=args.overwrite or None)
    print(outdir)
    return EXIT_OK


def _sweep_one(path: str, overwrite: bool):
    cfg = load_config(path)
    outdir = runner.run_scenario(cfg, overwrite=overwrite or None)
    return cfg.name, outdir


def _cmd_sweep(args) -> int:
    paths = sorted(globlib.glob(args.pattern))
    if not paths:
        print(f"no configs match {args.pattern!r}", file=sys.stderr)
        return EXIT_VALIDATION
    workers = int(os.environ.get("GWBEC_THREADS", os.cpu_count() or 1))
    results: dict[str, tuple[str, Path | None, int]] = {}

    def job(path: str):
        try:
            name, outdir = _sweep_one(path, args.overwrite)
            return path, name, outdir, EXIT_OK, None
        except Exception as exc:  # classified below, sweep keeps going
            try:
                code = _classify(exc)
            except Exception:
                raise exc
            return path, Path(path).stem, None, code, str(exc)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for path, name, outdir, code, error in pool.map(job, paths):
            results[path] = (name, outdir, code)
            if error:
                print(f"{path}: {error}", file=sys.stderr)
            else:
                print(f"{path}: {outdir}")

    summary = Path(args.summary)
    rows = ["scenario,status,phi,bound_energy,bound_trap,margin_energy,margin_trap,"
            "h_N,h_sqrt_nN,h_n,h"]
    for path in paths:
        name, outdir, code = results[path]
        fields = [name, "ok" if code == EXIT_OK else f"exit{code}"] + [""] * 9
        if outdir is not None and (outdir / "detection_report.json").exists():
            rep = json.loads((outdir / "detection_report.json").read_text())
            margins = rep["margins"]
            fields[2:] = [
                "%.17g" % rep["phi"],
                "%.17g" % rep["bound_energy"],
                "%.17g" % rep["bound_trap"],
                "" if margins["energy_bound_over_phi"] is None
                else "%.17g" % margins["energy_bound_over_phi"],
                "" if margins["trap_bound_over_phi"] is None
                else "%.17g" % margins["trap_bound_over_phi"],
                *("%.17g" % level for level in rep["hierarchy"]),
            ]
        rows.append(",".join(fields))
    summary.write_text("\n".join(rows) + "\n")
    print(f"summary: {summary}")
    return max(code for _, _, code in results.values())


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    for warning in cfg.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"ok: {cfg.name} ({cfg.pipeline})")
    return EXIT_OK


def _cmd_plot(args) -> int:
    path = runner.emit_plot_script(args.artifact_dir)
    print(path)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    waveform = waveforms.make_waveform(
        "sinusoid", h_max=args.hmax, frequency=1.0, duration=args.T
    )
    scenario = detect.DetectionScenario(
        waveform=waveform,
        T=args.T,
        N=args.N,
        n=args.n,
        E_total=args.E,
        E_kin=args.E if args.E_kin is None else args.E_kin,
        dVdh_max=args.dVdh,
        n_source="cli",
    )
    report = detect.build_report(scenario, 0.0)
    sys.stdout.write(report.to_json())
    return EXIT_OK


def _cmd_template(args) -> int:
    sys.stdout.write(default_config_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwbec",
        description="condensate-under-strain scenario runner",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--outdir", default=None, help="override the output directory")
    p_run.add_argument("--overwrite", action="store_true", help="reuse a non-empty directory")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run every config matching a glob")
    p_sweep.add_argument("pattern")
    p_sweep.add_argument("--overwrite", action="store_true")
    p_sweep.add_argument("--summary", default="sweep_summary.csv",
                         help="where to write the sweep summary CSV")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_plot = sub.add_parser("plot", help="write a plot script into an artifact directory")
    p_plot.add_argument("artifact_dir")
    p_plot.set_defaults(func=_cmd_plot)

    p_bounds = sub.add_parser("bounds", help="detectability arithmetic, no PDE")
    p_bounds.add_argument("--T", type=float, required=True, help="integration time [s]")
    p_bounds.add_argument("--hmax", type=float, required=True, help="peak strain")
    p_bounds.add_argument("--E", type=float, required=True, help="total energy [eV]")
    p_bounds.add_argument("--E-kin", type=float, default=None, dest="E_kin",
                          help="kinetic energy [eV] (default: same as --E)")
    p_bounds.add_argument("--N", type=float, default=1.0, help="atom number")
    p_bounds.add_argument("--n", type=float, default=0.0, help="phonon number")
    p_bounds.add_argument("--dVdh", type=float, default=0.0,
                          help="peak trap-strain coupling [eV]")
    p_bounds.set_defaults(func=_cmd_bounds)

    p_tmpl = sub.add_parser("template", help="print a fully-commented default config")
    p_tmpl.set_defaults(func=_cmd_template)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        return _report(exc)


if __name__ == "__main__":
    sys.exit(main())
