"""Command-line front end: estimate, simulate, bounds, roc.

All numeric output is emitted with 17 significant digits so files
round-trip IEEE doubles exactly; a fixed (config, seed) pair therefore
reproduces CSV output byte for byte.  Each subcommand accepts ``--config
FILE`` with a JSON object whose keys are the subcommand's option names
(underscored); explicit command-line flags win over config-file values.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import signal_io
from .atoms import FourierAtoms
from .bounds import crb_single, zzb_single
from .compressive import CompressiveAtoms, MeasurementMatrix
from .estimator import BicStop, CfarStop, EstimatorConfig, extract_spectrum
from .scenarios import (
    CompressiveSpec,
    FixedSnr,
    UniformSnr,
    campaign_csv_text,
    run_campaign,
    scenario_preset,
    write_campaign_csv,
)
from .stopping import CfarSpec, cfar_threshold, p_miss_model


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="nomp", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)
    by_name: dict[str, argparse.ArgumentParser] = {}

    est = subs.add_parser("estimate", help="estimate sinusoids in a signal file")
    est.add_argument("--in", dest="infile", required=True, help="signal file to read")
    est.add_argument("--format", choices=("csv", "bin"), default="csv")
    est.add_argument("--sigma2", type=float, default=1.0, help="noise variance")
    est.add_argument("--pfa", type=float, default=0.01, help="CFAR false-alarm rate")
    est.add_argument("--gamma", type=int, default=4, help="detection grid oversampling")
    est.add_argument("--rs", type=int, default=1, help="Newton steps per refinement")
    est.add_argument("--rc", type=int, default=3, help="cyclic refinement rounds")
    est.add_argument("--variant", choices=("nomp", "nomp-minus", "domp"), default="nomp")
    est.add_argument("--stop", choices=("cfar", "bic"), default="cfar")
    est.add_argument("--bic-threshold", type=float, default=10.0)
    est.add_argument("--max-iterations", type=int, default=None)
    est.add_argument("--compressive-matrix", default=None, help="binary measurement matrix file")
    est.add_argument("--config", default=None)
    by_name["estimate"] = est

    sim = subs.add_parser("simulate", help="run a Monte-Carlo campaign")
    sim.add_argument("--scenario", type=int, choices=(1, 2, 3, 4), required=True)
    sim.add_argument("--trials", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--snr-db", type=float, default=None,
                     help="override the nominal SNR (shifts a uniform law's window)")
    sim.add_argument("--k", type=int, default=None, help="override the tone count")
    sim.add_argument("--compressive-m", type=int, default=None,
                     help="take this many compressive measurements per trial")
    sim.add_argument("--compressive-dist", choices=("qpsk", "pm_one", "gaussian"), default="qpsk")
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    sim.add_argument("--plot", action="store_true", help="render a PNG next to the CSV")
    sim.add_argument("--config", default=None)
    by_name["simulate"] = sim

    bnd = subs.add_parser("bounds", help="tabulate CRB and ZZB over an SNR sweep")
    bnd.add_argument("--n", type=int, default=256)
    bnd.add_argument("--snr-db-min", type=float, default=5.0)
    bnd.add_argument("--snr-db-max", type=float, default=35.0)
    bnd.add_argument("--step", type=float, default=1.0)
    bnd.add_argument("--out", default=None)
    bnd.add_argument("--plot", action="store_true")
    bnd.add_argument("--config", default=None)
    by_name["bounds"] = bnd

    roc = subs.add_parser("roc", help="thresholds and modeled miss rates per false-alarm rate")
    roc.add_argument("--snr-db", type=float, required=True)
    roc.add_argument("--n", type=int, default=256)
    roc.add_argument("--sigma2", type=float, default=1.0)
    roc.add_argument("--pfa-list", default="0.001,0.01,0.05,0.1",
                     help="comma-separated nominal false-alarm rates")
    roc.add_argument("--out", default=None)
    roc.add_argument("--plot", action="store_true")
    roc.add_argument("--config", default=None)
    by_name["roc"] = roc

    return parser, by_name


def _apply_config(parser: argparse.ArgumentParser, subs: dict, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
        if not isinstance(overrides, dict):
            raise SystemExit(f"config file {args.config} must hold a JSON object")
        sub = subs[args.command]
        known = {a.dest for a in sub._actions}
        bad = set(overrides) - known
        if bad:
            raise SystemExit(f"config keys not recognized by '{args.command}': {sorted(bad)}")
        sub.set_defaults(**overrides)
        args = parser.parse_args(argv)  # explicit flags still win
    return args


def _cmd_estimate(args: argparse.Namespace) -> int:
    y = signal_io.read_signal(args.infile, args.format)
    if args.compressive_matrix:
        entries = signal_io.read_matrix_bin(args.compressive_matrix)
        provider = CompressiveAtoms(MeasurementMatrix(entries=entries, dist="file"))
    else:
        provider = FourierAtoms(y.size)
    if args.stop == "cfar":
        stopping = CfarStop(sigma_sq=args.sigma2, p_fa=args.pfa)
    else:
        stopping = BicStop(sigma_sq=args.sigma2, threshold=args.bic_threshold)
    config = EstimatorConfig(
        gamma=args.gamma,
        r_s=args.rs,
        r_c=args.rc,
        stopping=stopping,
        variant=args.variant.replace("-", "_"),
        max_iterations=args.max_iterations,
    )
    report = extract_spectrum(y, provider, config)
    params = ",\n    ".join(
        "{" + f'"re": {_fmt(p.gain.real)}, "im": {_fmt(p.gain.imag)}, "omega": {_fmt(p.omega)}' + "}"
        for p in report.params
    )
    body = "[\n    " + params + "\n  ]" if report.params else "[]"
    print("{")
    print(f'  "params": {body},')
    print(f'  "iterations": {report.iterations},')
    print(f'  "stop_reason": "{report.stop_reason}"')
    print("}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    overrides: dict = {"trials": args.trials, "seed": args.seed}
    if args.k is not None:
        overrides["k"] = args.k
    if args.compressive_m is not None:
        overrides["compressive"] = CompressiveSpec(m=args.compressive_m, dist=args.compressive_dist)
    config = scenario_preset(args.scenario, **overrides)
    if args.snr_db is not None:
        if isinstance(config.snr, FixedSnr):
            config = replace(config, snr=FixedSnr(args.snr_db))
        else:
            half = 0.5 * (config.snr.hi_db - config.snr.lo_db)
            config = replace(config, snr=UniformSnr(args.snr_db - half, args.snr_db + half))
    summary = run_campaign(config, jobs=args.jobs)
    if args.out:
        write_campaign_csv(summary, args.out)
        if args.plot:
            from .reports import render_campaign

            render_campaign(summary, Path(args.out).with_suffix(".png"))
    else:
        sys.stdout.write(campaign_csv_text(summary))
        if args.plot:
            print("note: --plot needs --out to know where to put the figure", file=sys.stderr)
    return 0


def _cmd_bounds(args: argparse.Namespace) -> int:
    if args.step <= 0:
        raise SystemExit("--step must be positive")
    grid = np.arange(args.snr_db_min, args.snr_db_max + 0.5 * args.step, args.step)
    lines = ["snr_db,crb,zzb"]
    crbs, zzbs = [], []
    for db in grid:
        snr = 10.0 ** (db / 10.0)
        c = crb_single(snr, args.n)
        z = zzb_single(snr, args.n)
        crbs.append(c)
        zzbs.append(z)
        lines.append(f"{db:.17g},{c:.17g},{z:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
        if args.plot:
            from .reports import render_bounds

            render_bounds(grid, np.asarray(crbs), np.asarray(zzbs), Path(args.out).with_suffix(".png"))
    else:
        sys.stdout.write(text)
    return 0


def _cmd_roc(args: argparse.Namespace) -> int:
    try:
        pfas = [float(tok) for tok in args.pfa_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise SystemExit(f"bad --pfa-list: {exc}") from exc
    snr = 10.0 ** (args.snr_db / 10.0)
    lines = ["pfa_nominal,tau,pmiss_model"]
    taus, misses = [], []
    for pfa in pfas:
        tau = cfar_threshold(CfarSpec(sigma_sq=args.sigma2, n=args.n, p_fa=pfa))
        pm = p_miss_model(snr, tau, args.sigma2)
        taus.append(tau)
        misses.append(pm)
        lines.append(f"{pfa:.17g},{tau:.17g},{pm:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
        if args.plot:
            from .reports import render_roc

            render_roc(np.asarray(pfas), np.asarray(misses), Path(args.out).with_suffix(".png"))
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser, subs = _build_parser()
    args = _apply_config(parser, subs, list(sys.argv[1:] if argv is None else argv))
    handlers = {
        "estimate": _cmd_estimate,
        "simulate": _cmd_simulate,
        "bounds": _cmd_bounds,
        "roc": _cmd_roc,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


cli_main = main


if __name__ == "__main__":
    raise SystemExit(main())
