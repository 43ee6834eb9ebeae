"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 bad arguments, 3 the fit was
rejected by the quality filter (the report is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

from gobm.data_io import load_log_series, qc_filter, read_manifest
from gobm.errors import GobmError
from gobm.estimators import fit_at_threshold
from gobm.mc import PARAMETER_SETS, ExperimentSpec, densities_csv, export_densities, run_experiment
from gobm.model import DEFAULT_DT, GobmParams, appreciation_rates
from gobm.nonparam import default_grid, nw_estimate
from gobm.simulate import SimulationSpec, path_csv, simulate_paths
from gobm.threshold import DEFAULT_GRID_SIZE, DEFAULT_MIN_SIDE_FRACTION, select_threshold
from gobm.voltest import DEFAULT_ALPHA, test_equal_volatility

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_QC = 0, 1, 2, 3

BATCH_COLUMNS = ["ticker", "m", "sigma_minus", "sigma_plus", "mu_minus", "mu_plus",
                 "b_minus", "b_plus", "signs", "reject", "excluded"]


class UsageError(Exception):
    pass


def _env_float(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"environment variable {name}={raw!r} is not a number") from None


def _write(text, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------- validation

def _check(args):
    if getattr(args, "dt", None) is not None and not (math.isfinite(args.dt) and args.dt > 0):
        raise UsageError("--dt must be > 0")
    if getattr(args, "alpha", None) is not None and not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    if getattr(args, "grid_size", None) is not None and args.grid_size < 1:
        raise UsageError("--grid-size must be >= 1")
    msf = getattr(args, "min_side_fraction", None)
    if msf is not None and not 0 <= msf < 0.5:
        raise UsageError("--min-side-fraction must lie in [0, 0.5)")
    bw = getattr(args, "bandwidth", None)
    if bw is not None and not bw > 0:
        raise UsageError("--bandwidth must be > 0")
    for name in ("sigma_minus", "sigma_plus"):
        v = getattr(args, name, None)
        if v is not None and not v > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be > 0")
    if getattr(args, "m", None) is not None and not args.m > 0:
        raise UsageError("--m must be > 0")
    if getattr(args, "s0", None) is not None and not args.s0 > 0:
        raise UsageError("--s0 must be > 0")
    if getattr(args, "steps", None) is not None and args.steps < 0:
        raise UsageError("--steps must be >= 0")
    if getattr(args, "years", None) is not None and not args.years > 0:
        raise UsageError("--years must be > 0")
    if getattr(args, "paths", None) is not None and args.paths < 1:
        raise UsageError("--paths must be >= 1")
    seed = getattr(args, "seed", None)
    if seed is not None and not 0 <= seed < 2**64:
        raise UsageError("--seed must fit in 64 unsigned bits")


def _params(args):
    if args.set is not None:
        if args.sigma_minus is not None or args.sigma_plus is not None:
            raise UsageError("--set excludes --sigma-minus/--sigma-plus")
        return PARAMETER_SETS[args.set]
    if args.command == "mc" and args.sigma_minus is None and args.sigma_plus is None:
        return PARAMETER_SETS[1]
    if args.sigma_minus is None or args.sigma_plus is None:
        raise UsageError("give --set or both --sigma-minus and --sigma-plus")
    return GobmParams.from_rates(args.sigma_minus, args.sigma_plus, args.mu_minus, args.mu_plus, m=args.m)


# ---------------------------------------------------------------- pipeline

def _load(args):
    return load_log_series(args.input, dt=args.dt, date_col=args.date_col, close_col=args.close_col,
                           prefer_adjusted=args.adjusted, log_column=args.log_column)


def _fit(X, args):
    """Fixed-threshold fit or scan; returns ``(fit, scan_or_None)``."""
    weight = 0.5 if args.halved_local_time else 1.0
    if args.threshold is not None:
        return fit_at_threshold(X, args.threshold, weight), None
    scan = select_threshold(X, args.grid_size, args.min_side_fraction, weight)
    return scan.fit, scan


def fit_report(X, args):
    fit, scan = _fit(X, args)
    report = fit.to_dict()
    report["threshold_selection"] = "fixed" if scan is None else "scan"
    report["reference_loglik"] = scan.reference_loglik if scan is not None else None
    test = None
    if not args.no_test:
        try:
            test = test_equal_volatility(fit, args.alpha).to_dict()
        except GobmError as exc:
            test = {"alpha": args.alpha, "unavailable": str(exc)}
    report["equal_vol_test"] = test
    verdict = qc_filter(fit, args.min_side_fraction)
    report["qc"] = {"accepted": verdict.accepted, "reason": verdict.reason}
    return report, fit, scan, verdict


# ---------------------------------------------------------------- commands

def cmd_simulate(args):
    params = _params(args)
    n = args.steps if args.steps is not None else int(round(args.years / args.dt))
    spec = SimulationSpec(params, x0=math.log(args.s0), n=n, dt=args.dt, seed=args.seed)
    values = simulate_paths(spec, 1, first_index=args.path_index)[0]
    _write(path_csv(values, args.dt), args.out)
    return EXIT_OK


def cmd_fit(args):
    X = _load(args)
    report, _, scan, verdict = fit_report(X, args)
    _write(_dump(report), args.out)
    if args.scan_out and scan is not None:
        _write(scan.to_csv(), args.scan_out)
    return EXIT_OK if verdict.accepted else EXIT_QC


def cmd_scan(args):
    X = _load(args)
    weight = 0.5 if args.halved_local_time else 1.0
    scan = select_threshold(X, args.grid_size, args.min_side_fraction, weight)
    _write(scan.to_csv(), args.out)
    line = scan.summary_json() + "\n"
    if args.summary:
        _write(line, args.summary)
    else:
        sys.stderr.write(line)
    return EXIT_OK


def cmd_test(args):
    X = _load(args)
    fit, _ = _fit(X, args)
    test = test_equal_volatility(fit, args.alpha)
    out = test.to_dict()
    out["r"] = fit.r
    out["m"] = fit.m
    _write(_dump(out), args.out)
    if args.ellipse_out:
        _write(test.boundary_csv(), args.ellipse_out)
    return EXIT_OK


def _signs(bm, bp):
    def s(v):
        return "+" if v > 0 else "-" if v < 0 else "0"
    return s(bm) + s(bp)


def cmd_batch(args):
    scale = 100.0 if args.units == "percent" else 1.0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BATCH_COLUMNS)
    for ticker, path in read_manifest(args.manifest):
        args.input = path
        try:
            X = _load(args)
            report, fit, _, verdict = fit_report(X, args)
        except (GobmError, OSError, ValueError) as exc:
            w.writerow([ticker] + [""] * 9 + [f"error: {exc}"])
            continue
        vm, vp, bm, bp = fit.sigma_minus_hat, fit.sigma_plus_hat, fit.b_minus_hat, fit.b_plus_hat
        if all(math.isfinite(v) for v in (vm, vp)):
            mu_m, mu_p = appreciation_rates(bm, bp, vm, vp)
        else:
            mu_m = mu_p = math.nan
        test = report["equal_vol_test"]
        reject = "" if not test or "reject" not in test else int(test["reject"])
        w.writerow([
            ticker, _num(fit.m), _num(vm * scale), _num(vp * scale), _num(mu_m * scale), _num(mu_p * scale),
            _num(bm * scale), _num(bp * scale), _signs(bm, bp), reject,
            "" if verdict.accepted else verdict.reason,
        ])
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def _num(v):
    return repr(float(v)) if math.isfinite(v) else ""


def cmd_mc(args):
    params = _params(args)
    spec = ExperimentSpec(params, n_paths=args.paths, years=args.years, observations_per_year=args.obs_per_year,
                          alpha=args.alpha, seed=args.seed, search_threshold=not args.fixed_threshold,
                          x0=math.log(args.s0), grid_size=args.grid_size,
                          min_side_fraction=args.min_side_fraction)
    summary = run_experiment(spec, workers=args.workers)
    _write(summary.to_json() + "\n", args.out)
    if args.paths_out:
        _write(summary.paths_csv(), args.paths_out)
    if args.density_dir:
        try:
            tables = export_densities(summary)
        except GobmError as exc:
            sys.stderr.write(f"density export skipped: {exc}\n")
        else:
            d = Path(args.density_dir)
            d.mkdir(parents=True, exist_ok=True)
            for name, table in tables.items():
                (d / f"density_{name}.csv").write_text(densities_csv(table), encoding="utf-8")
    return EXIT_OK


def cmd_nonparam(args):
    X = _load(args)
    grid = default_grid(X.values, args.grid_points)
    curve = nw_estimate(X, args.bandwidth, grid)
    _write(curve.to_csv(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_input(p):
    p.add_argument("input", help="price CSV, simulator CSV, or any CSV with --log-column")
    p.add_argument("--date-col", default="Date")
    p.add_argument("--close-col", default="Close")
    p.add_argument("--adjusted", action="store_true", help="read the 'Adj Close' column")
    p.add_argument("--log-column", help="read log-prices from this column")


def _add_fit_options(p):
    p.add_argument("--threshold", type=float, help="fixed log-price threshold (skips the scan)")
    p.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--min-side-fraction", type=float, default=DEFAULT_MIN_SIDE_FRACTION)
    p.add_argument("--halved-local-time", action="store_true",
                   help="subtract half the discrete local time in the drift estimates")


def _add_model(p):
    p.add_argument("--set", type=int, choices=sorted(PARAMETER_SETS), help="predefined parameter set")
    p.add_argument("--sigma-minus", type=float)
    p.add_argument("--sigma-plus", type=float)
    p.add_argument("--mu-minus", type=float, default=0.0)
    p.add_argument("--mu-plus", type=float, default=0.0)
    p.add_argument("--m", type=float, default=1.0, help="price threshold")
    p.add_argument("--s0", type=float, default=1.0, help="initial price")
    p.add_argument("--seed", type=int, default=0)


def _with_parents(add_parser, common):
    def add(name, **kwargs):
        return add_parser(name, parents=[common], **kwargs)
    return add


def build_parser(dt_default, alpha_default):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dt", type=float, default=dt_default, help="time step in years (env GOBM_DT)")
    common.add_argument("--alpha", type=float, default=alpha_default, help="test level (env GOBM_ALPHA)")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="gobm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser = _with_parents(sub.add_parser, common)

    p = sub.add_parser("simulate", help="simulate one Euler path")
    _add_model(p)
    p.add_argument("--years", type=float, default=5.0)
    p.add_argument("--steps", type=int, help="number of steps (overrides --years)")
    p.add_argument("--path-index", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="threshold scan, fit, equal-volatility test and QC")
    _add_input(p)
    _add_fit_options(p)
    p.add_argument("--no-test", action="store_true")
    p.add_argument("--out")
    p.add_argument("--scan-out", help="write the candidate table here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("scan", help="log-likelihood over candidate thresholds")
    _add_input(p)
    _add_fit_options(p)
    p.add_argument("--out")
    p.add_argument("--summary", help="write the one-line JSON summary here (default stderr)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("test", help="equal-volatility test at the selected or given threshold")
    _add_input(p)
    _add_fit_options(p)
    p.add_argument("--out")
    p.add_argument("--ellipse-out", help="write 360 boundary points here")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("batch", help="fit every ticker of a ticker,path manifest")
    p.add_argument("manifest")
    p.add_argument("--date-col", default="Date")
    p.add_argument("--close-col", default="Close")
    p.add_argument("--adjusted", action="store_true")
    p.add_argument("--log-column")
    _add_fit_options(p)
    p.add_argument("--units", choices=["percent", "fraction"], default="percent")
    p.add_argument("--out")
    p.set_defaults(func=cmd_batch, no_test=False)

    p = sub.add_parser("mc", help="Monte Carlo study (parameter set 1 unless given)")
    _add_model(p)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--years", type=float, default=5.0)
    p.add_argument("--obs-per-year", type=int, default=252)
    p.add_argument("--fixed-threshold", action="store_true", help="test at the true threshold")
    p.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--min-side-fraction", type=float, default=DEFAULT_MIN_SIDE_FRACTION)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--paths-out")
    p.add_argument("--density-dir")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("nonparam", help="Nadaraya-Watson drift and volatility curves")
    _add_input(p)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--grid-points", type=int, default=101)
    p.add_argument("--out")
    p.set_defaults(func=cmd_nonparam)
    return parser


def main(argv=None):
    try:
        parser = build_parser(_env_float("GOBM_DT", DEFAULT_DT), _env_float("GOBM_ALPHA", DEFAULT_ALPHA))
    except UsageError as exc:
        sys.stderr.write(f"gobm: error: {exc}\n")
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        _check(args)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"gobm: error: {exc}\n")
        return EXIT_USAGE
    except (GobmError, OSError, ValueError) as exc:
        sys.stderr.write(f"gobm: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
