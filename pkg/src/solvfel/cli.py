"""Command-line entry point: ``solvfel {constants,simulate,sweep,verify}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 integration divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import diagnostics as dg
from .config import default_config, load_config
from .dynamics import deriv_scaled, init_state, integrate
from .errors import ConfigError, IntegrationDiverged, SolvfelError
from .params import CODATA, derive, design_formulas
from .sweep import run_sweep

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3
OUT_ENV = "SOLVFEL_OUT_DIR"
TRACE_HEADER = ("tau", "A0", "phi", "b_re", "b_im", "mean_p", "conserved_C")
SWEEP_HEADER = ("axis_value", "observable", "tau_sat", "A_peak", "growth_rate", "status")


def fmt(x):
    """Locale-independent float text with 17 significant digits."""
    return format(float(x), ".17g")


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _write_json(path, payload):
    path.write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _now():
    return datetime.now(timezone.utc).isoformat()


def _out_dir(arg):
    out = Path(arg or os.environ.get(OUT_ENV) or "solvfel_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    cfg = load_config(args.config) if args.config else default_config()
    if getattr(args, "seed", None) is not None:
        cfg.sim = replace(cfg.sim, seed=args.seed)
        if cfg.sweep is not None:
            cfg.sweep = replace(cfg.sweep, sim=cfg.sim)
    return cfg


def constants_report(medium, constants=CODATA):
    dp = derive(medium, constants)
    design = design_formulas(
        medium.concentration, dp.P_z, n=medium.n, T=medium.T, wavenumber=medium.wavenumber,
        d_e=medium.d_e, d_g=medium.d_g, constants=constants,
    )
    report = dp.as_dict()
    report.update(
        l_c_um=dp.l_c * 1e6,
        eps_over_kT=dp.eps / (constants.k_B * medium.T),
        rho=medium.concentration,
        N_ions=medium.ion_count,
        A_sat_physical=design.A_sat,
        t_gain_physical=design.t_gain,
        c_A_eff=design.c_A_eff,
        c_t_eff=design.c_t_eff,
    )
    return report


def cmd_constants(args):
    cfg = _load(args)
    report = constants_report(cfg.medium)
    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    elif args.format == "csv":
        text = "key,value\n" + "".join(f"{k},{fmt(v)}\n" for k, v in report.items())
    else:
        width = max(len(k) for k in report)
        text = "".join(f"{k:<{width}}  {v:.6g}\n" for k, v in report.items())
    sys.stdout.write(text)
    if args.out:
        suffix = {"json": "json", "csv": "csv"}.get(args.format, "txt")
        (_out_dir(args.out) / f"constants.{suffix}").write_text(text, encoding="utf-8")
    return EXIT_OK


def summarize(trace, dp):
    summary = {"n_records": len(trace), "tau_final": trace[-1].tau, "A0_final": trace[-1].A0_scaled}
    c0 = trace[0].conserved_C
    summary["conservation_drift"] = max(abs(r.conserved_C - c0) for r in trace)
    for key, fn in (
        ("growth_rate", lambda: dg.fit_growth_rate_modal(trace)),
        ("growth_rate_logslope", lambda: dg.fit_growth_rate(trace)),
    ):
        try:
            summary[key] = fn()
        except SolvfelError:
            summary[key] = None
    try:
        tau_sat, a_peak = dg.detect_saturation(trace)
        summary.update(
            tau_sat=tau_sat, A_peak=a_peak,
            t_sat_physical=tau_sat * dp.t_scale, A_peak_physical=a_peak * dp.a_scale,
        )
    except SolvfelError:
        summary.update(tau_sat=None, A_peak=None, t_sat_physical=None, A_peak_physical=None)
    summary.update(a_scale=dp.a_scale, t_scale=dp.t_scale)
    return summary


def cmd_simulate(args):
    cfg = _load(args)
    out = _out_dir(args.out)
    dp = derive(cfg.medium)
    manifest = {
        "command": "simulate",
        "tool_version": __version__,
        "config": cfg.echo(),
        "seed": cfg.sim.seed,
        "start_time": _now(),
    }
    trace = []
    status, code = "ok", EXIT_OK
    try:
        integrate(init_state(cfg.sim), deriv_scaled, cfg.sim.d_tau, cfg.sim.tau_max,
                  trace.append, cfg.sim.record_stride)
    except IntegrationDiverged as exc:
        status, code = f"diverged: {exc}", EXIT_DIVERGED
        print(f"error: integration diverged: {exc}", file=sys.stderr)
    with open(out / "trace.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in trace:
            w.writerow([fmt(v) for v in r])
    if trace:
        _write_json(out / "summary.json", summarize(trace, dp))
    manifest.update(end_time=_now(), status=status)
    _write_json(out / "manifest.json", manifest)
    if code == EXIT_OK:
        print(f"wrote {len(trace)} records to {out / 'trace.csv'}")
    return code


def cmd_sweep(args):
    cfg = _load(args)
    if cfg.sweep is None:
        raise ConfigError("config has no [sweep] section", path=args.config)
    out = _out_dir(args.out)
    manifest = {
        "command": "sweep",
        "tool_version": __version__,
        "config": cfg.echo(),
        "seed": cfg.sim.seed,
        "start_time": _now(),
    }
    result = run_sweep(cfg.sweep, max_workers=cfg.workers)
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in result.rows:
            w.writerow([fmt(r.axis_value), fmt(r.observable), fmt(r.tau_sat), fmt(r.A_peak),
                        fmt(r.growth_rate), r.status])
    fit = result.fit._asdict() if result.fit else None
    _write_json(out / "fit.json", {"axis": cfg.sweep.axis, "observable": cfg.sweep.observable, "fit": fit})
    failed = [r for r in result.rows if r.status != "ok"]
    manifest.update(end_time=_now(), status="ok" if not failed else f"{len(failed)} row(s) failed")
    _write_json(out / "manifest.json", manifest)
    for r in failed:
        print(f"warning: row {r.axis_value:g} failed: {r.status}", file=sys.stderr)
    if fit:
        print(f"exponent {fit['exponent']:.6f}  prefactor {fit['prefactor']:.6g}  r^2 {fit['r_squared']:.6f}")
    return EXIT_OK


def _parse_perturb(items):
    out = {}
    for item in items or ():
        name, _, factor = item.partition("=")
        if not hasattr(CODATA, name) or not factor:
            raise ConfigError(f"--perturb expects CONSTANT=FACTOR with a known constant, got {item!r}")
        try:
            out[name] = float(factor)
        except ValueError:
            raise ConfigError(f"--perturb factor is not a number: {item!r}") from None
    return out


def cmd_verify(args):
    from .verify import run_battery

    perturb = _parse_perturb(args.perturb)
    results = run_battery(quick=args.quick, perturb=perturb, report=lambda r: print(r.line(), flush=True))
    failed = [r for r in results if r.status == "fail"]
    skipped = [r for r in results if r.status == "skip"]
    print(f"{len(results) - len(failed) - len(skipped)} passed, {len(failed)} failed, {len(skipped)} skipped")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="solvfel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="INI config or JSON manifest")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./solvfel_out)")
        p.add_argument("--seed", type=int, help="override the simulation seed (unsigned 64-bit)")

    p = sub.add_parser("constants", help="derived constants and design-formula predictions")
    common(p)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("simulate", help="integrate the scaled dynamics and write trace/summary/manifest")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a parameter sweep and fit a power law")
    common(p, config_required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the acceptance battery")
    p.add_argument("--quick", action="store_true", help="skip the large-ensemble runs")
    p.add_argument("--perturb", action="append", metavar="CONSTANT=FACTOR",
                   help="test hook: scale a physical constant before verifying")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolvfelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
