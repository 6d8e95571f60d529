"""Command line front end: kernel values, envelope fits, the check suite and the maximal harness.

Exit codes: 0 success, 1 a check or fit failed, 2 usage error, 3 t below the
series precision floor.  CSV numbers carry 17 significant digits and JSON
keys are sorted, so output is byte-stable for fixed flags.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from .envelopes import FitInfeasibleError, GridSpec, ReportRow, fit_constants
from .kernels import (
    T_FLOOR,
    HeatPoint,
    PrecisionFloorError,
    SeriesTruncation,
    dirichlet_neumann_oracle,
    func_heat,
    heat_series,
    heat_series_grid,
    reduction_heat,
    trig_prefactor,
)
from .maximal import DEFAULT_LADDER, DEFAULT_WIDTHS, MultiParams, run_weak_type_experiment
from .quadrature import QuadratureError
from .specfun import JacobiParams
from .tables import dumps_json, write_csv
from .verify import DEFAULT_PARAMS, DEFAULT_SEED, GLOBAL_CHECKS, PARAM_CHECKS, run_all

__all__ = ["main", "build_parser", "GridSpec", "ReportRow",
           "cmd_eval", "cmd_verify", "cmd_envelope", "cmd_maximal", "cmd_table",
           "EXIT_OK", "EXIT_FAIL", "EXIT_USAGE", "EXIT_FLOOR"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_FLOOR = 0, 1, 2, 3
TABLE_COLUMNS = ("alpha", "beta", "theta", "phi", "t", "kernel", "tail_bound", "certified", "rounding")


class UsageError(ValueError):
    """Invalid flag values (as opposed to unparseable flags, which argparse handles)."""


def _params(alpha, beta) -> JacobiParams:
    try:
        return JacobiParams(alpha, beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _pair(text: str):
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ALPHA,BETA, got {text!r}")
    return a, b


def _floats(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _grid(args) -> GridSpec:
    if args.t_values:
        ts = args.t_values
    else:
        ts = np.geomspace(args.t_min, args.t_max, args.t_count).tolist()
    if min(ts) < T_FLOOR:
        raise PrecisionFloorError(f"t = {min(ts):g} is below the series floor {T_FLOOR:g}")
    try:
        return GridSpec(args.theta_steps, args.phi_steps, tuple(ts))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    params = _params(args.alpha, args.beta)
    if args.t < T_FLOOR:
        raise PrecisionFloorError(f"t = {args.t:g} is below the series floor {T_FLOOR:g}")
    try:
        point = HeatPoint(args.theta, args.phi, args.t)
        trunc = SeriesTruncation(tail_tol=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    # factor taking the pure-setting value to the requested setting
    s = params.s
    trig = 2.0 ** s * math.exp(-0.25 * args.t * s * s)
    factor = {"pure": 1.0, "trig": trig,
              "func": trig * float(trig_prefactor(params, point.theta, point.phi))}[args.setting]
    out = {"alpha": params.alpha, "beta": params.beta, "theta": point.theta, "phi": point.phi,
           "t": point.t, "setting": args.setting, "method": args.method}
    if args.method == "series":
        kv = func_heat(params, point, trunc) if args.setting == "func" else heat_series(
            params, point.x, point.y, point.t, trunc)
        f = 1.0 if args.setting == "func" else factor
        out.update(value=f * kv.value, tail_bound=f * kv.tail_bound, terms_used=kv.terms_used,
                   certified=kv.certified, rounding=f * kv.rounding)
    elif args.method == "reduction":
        if not params.in_theorem_range:
            raise UsageError("the reduction path needs alpha, beta >= -1/2")
        try:
            value = reduction_heat(params, point, trunc, rel_tol=args.tol)
            converged = True
        except QuadratureError as exc:
            value, converged = exc.best, False
        out.update(value=factor * value, tail_bound=None, terms_used=None, certified=converged)
    else:
        try:
            trig_value = dirichlet_neumann_oracle(params, point)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        out.update(value=trig_value * factor / trig, tail_bound=0.0, terms_used=None, certified=True)
    _emit(dumps_json(out), None)
    return EXIT_OK


def cmd_verify(args) -> int:
    params = [_params(a, b) for a, b in (args.params or [(p.alpha, p.beta) for p in DEFAULT_PARAMS])]
    checks = None
    if args.checks:
        checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = [c for c in checks if c not in PARAM_CHECKS and c not in GLOBAL_CHECKS]
        if unknown:
            raise UsageError(f"unknown checks: {', '.join(unknown)}")
    results = run_all(params, seed=args.seed, checks=checks)
    _emit(dumps_json([r.to_dict() for r in results]), args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_envelope(args) -> int:
    params = _params(args.alpha, args.beta)
    grid = _grid(args)
    status = EXIT_OK
    try:
        constants, report = fit_constants(params, grid, envelope=args.envelope, with_rows=True)
    except FitInfeasibleError as exc:
        report, status = exc.report, EXIT_FAIL
        if report is None:
            raise
    summary = report.summary()
    summary["grid"] = grid.as_dict()
    summary["envelope"] = args.envelope
    summary["feasible"] = status == EXIT_OK
    if args.csv:
        rows = [dataclasses.astuple(r) for r in report.rows]
        _emit(write_csv(rows, ReportRow.COLUMNS), args.csv)
    _emit(dumps_json(summary), args.json)
    return status


def cmd_maximal(args) -> int:
    axes = args.axis or [(0.0, 0.0)]
    try:
        mp = MultiParams(tuple(_params(a, b) for a, b in axes))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    centers = None
    if args.centers:
        centers = [tuple(c) for c in args.centers]
        if any(len(c) != mp.dim for c in centers):
            raise UsageError("each center needs one angle per axis")
    ladder = np.geomspace(args.t_min, args.t_max, args.t_count).tolist() if args.t_count else DEFAULT_LADDER
    if min(ladder) < T_FLOOR:
        raise PrecisionFloorError(f"t = {min(ladder):g} is below the series floor {T_FLOOR:g}")
    report = run_weak_type_experiment(mp, centers, tuple(args.widths or DEFAULT_WIDTHS), ladder,
                                      degree=args.degree)
    _emit(write_csv(report.csv_rows(), report.COLUMNS), args.out)
    if args.summary:
        _emit(dumps_json(report.summary()), args.summary)
    return EXIT_OK if report.bounded else EXIT_FAIL


def cmd_table(args) -> int:
    params = _params(args.alpha, args.beta)
    grid = _grid(args)
    thetas, phis = grid.thetas(), grid.phis()
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    s = params.s
    rows = []
    for t in grid.t_values:
        kg = heat_series_grid(params, np.cos(thetas), np.cos(phis), t)
        factor = 1.0
        if args.setting != "pure":
            factor = 2.0 ** s * math.exp(-0.25 * t * s * s)
            if args.setting == "func":
                factor = factor * trig_prefactor(params, th, ph)
        factor = np.broadcast_to(factor, th.shape)
        for i in range(th.shape[0]):
            for j in range(th.shape[1]):
                f = factor[i, j]
                rows.append((params.alpha, params.beta, th[i, j], ph[i, j], t, f * kg.values[i, j],
                             f * kg.tail_bound, kg.certified, f * kg.rounding[i, j]))
    _emit(write_csv(rows, TABLE_COLUMNS), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_grid_flags(p):
    p.add_argument("--theta-steps", type=int, default=48)
    p.add_argument("--phi-steps", type=int, default=48)
    p.add_argument("--t-min", type=float, default=1e-3)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--t-count", type=int, default=25)
    p.add_argument("--t-values", type=_floats, default=None,
                   help="explicit comma-separated t values (overrides --t-min/--t-max/--t-count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jacobi-heat",
                                     description="Jacobi heat and Poisson kernels: evaluation, bounds, checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one kernel value")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--setting", choices=("pure", "trig", "func"), default="pure")
    p.add_argument("--method", choices=("series", "reduction", "oracle"), default="series")
    p.add_argument("--tol", type=float, default=1e-13,
                   help="series tail tolerance; relative tolerance of the reduction integral")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="run the check suite, print a JSON list of results")
    p.add_argument("--params", type=_pair, action="append", metavar="ALPHA,BETA",
                   help="parameter pair (repeatable); default: the four standard pairs")
    p.add_argument("--checks", default=None, help="comma-separated check names; default: all")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("envelope", help="fit envelope constants on a grid")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--envelope", choices=("main", "trig"), default="main")
    _add_grid_flags(p)
    p.add_argument("--csv", default=None, help="path for the per-point CSV report ('-' for stdout)")
    p.add_argument("--json", default=None, help="path for the fitted constants JSON (default stdout)")
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("maximal", help="weak type ratios of indicator bumps")
    p.add_argument("--axis", type=_pair, action="append", metavar="ALPHA,BETA",
                   help="type parameters of one axis (repeat per dimension); default one Legendre axis")
    p.add_argument("--centers", type=_floats, action="append", metavar="THETA[,THETA...]",
                   help="bump center angles (repeatable); default: a fixed set")
    p.add_argument("--widths", type=_floats, default=None, help="comma-separated bump widths")
    p.add_argument("--degree", type=int, default=None, help="Gauss nodes per axis")
    p.add_argument("--t-min", type=float, default=1e-3)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--t-count", type=int, default=0, help="ladder length (default: 40 values in [1e-3, 10])")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--summary", default=None, help="path for a JSON summary")
    p.set_defaults(func=cmd_maximal)

    p = sub.add_parser("table", help="raw kernel values over a grid as CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--setting", choices=("pure", "trig", "func"), default="pure")
    _add_grid_flags(p)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for bad flags
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PrecisionFloorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FLOOR
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
