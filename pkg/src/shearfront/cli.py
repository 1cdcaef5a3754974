"""Batch command-line interface.

Subcommands: speed (one minimization), curve (eigenvalue quotient along
a decay-rate range), sweep (amplitude/frequency study), fit (log-log
slope of a records file), oracle (direct PDE run).  All parameters can
come from a JSON config file; explicit flags override it, and the
effective configuration is echoed into output metadata.  Exit codes:
0 success, 2 numerical failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    BoundaryContaminationError,
    ComplexEigenvalueError,
    ConvergenceError,
    GridError,
    InsufficientDataError,
    PositivityError,
    RecordParseError,
    ShearError,
    StabilityError,
)
from .eigen import mu_of_lambda
from .grid import GridSpec
from .oracle import OracleConfig, estimate_speed, evolve, write_trace
from .shear import ShearSpec, load_table_csv, sample
from .speed import enhancement, minimize_speed
from .sweeps import SweepConfig, fit_loglog_slope, read_records, run_sweep

EXIT_OK = 0
EXIT_NUMERICAL = 2
EXIT_USAGE = 64

_NUMERICAL_ERRORS = (
    ConvergenceError,
    PositivityError,
    ComplexEigenvalueError,
    StabilityError,
    BoundaryContaminationError,
    InsufficientDataError,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with the scripting-friendly usage exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _parse_grid(text: str) -> GridSpec:
    try:
        n_y, n_tau = (int(part) for part in text.lower().split("x"))
        return GridSpec(n_y=n_y, n_tau=n_tau)
    except (ValueError, GridError) as exc:
        raise _UsageError(f"bad --grid {text!r}: {exc}") from exc


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError as exc:
        raise _UsageError(f"bad --range {text!r}: expected LO:HI") from exc
    if not lo < hi:
        raise _UsageError(f"bad --range {text!r}: LO must be below HI")
    return lo, hi


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise _UsageError(f"config {path} must hold a JSON object")
    return data


def _merged(args: argparse.Namespace, keys: list[str]) -> dict:
    """Config-file values overridden by explicit flags."""
    merged = dict(_load_config(getattr(args, "config", None)))
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _effective(merged: dict, defaults: dict) -> dict:
    eff = dict(defaults)
    eff.update(merged)
    return eff


def _require(eff: dict, key: str, kind, check, what: str):
    try:
        value = kind(eff[key])
    except (TypeError, ValueError) as exc:
        raise _UsageError(f"parameter {key}={eff[key]!r} is not a {what}") from exc
    if not check(value):
        raise _UsageError(f"parameter {key}={value!r} out of range ({what})")
    return value


def _shear_from(eff: dict) -> ShearSpec:
    if eff.get("shear_table"):
        return load_table_csv(eff["shear_table"])
    delta = _require(eff, "delta", float, lambda v: v >= 0, "nonnegative real")
    freq = _require(eff, "freq", int, lambda v: v >= 0, "nonnegative integer")
    return ShearSpec.parametric(delta, freq)


def _grid_from(eff: dict) -> GridSpec:
    grid = eff.get("grid")
    if grid is None:
        return GridSpec(32, 32)
    if isinstance(grid, str):
        return _parse_grid(grid)
    return grid


def _emit(text: str, out_path) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_speed(args) -> int:
    eff = _effective(
        _merged(args, ["delta", "freq", "fprime0", "grid"]),
        {"delta": 0.0, "freq": 0, "fprime0": 1.0, "grid": None},
    )
    fprime0 = _require(eff, "fprime0", float, lambda v: v > 0, "positive real")
    spec = _shear_from(eff)
    grid = _grid_from(eff)
    field = sample(spec, grid)
    result = minimize_speed(field, grid, fprime0)
    gain = enhancement(result, fprime0)
    print(f"minimal speed on a {grid.n_y}x{grid.n_tau} grid (fprime0={fprime0:g}):")
    print(f"  c*           = {result.c_star:.12g}")
    print(f"  lambda*      = {result.lambda_star:.12g}")
    print(f"  enhancement  = {gain:.12g}")
    print(f"  iterations   = {result.iterations}")
    print(f"  residual     = {result.residual:.3e}")
    print(f"  effective config: {json.dumps(eff, default=str, sort_keys=True)}")
    print(f"c_star={result.c_star:.17g} lambda_star={result.lambda_star:.17g}")
    return EXIT_OK


def cmd_curve(args) -> int:
    eff = _effective(
        _merged(
            args,
            ["delta", "freq", "fprime0", "grid", "lambda_min", "lambda_max", "steps"],
        ),
        {
            "delta": 0.0,
            "freq": 0,
            "fprime0": 1.0,
            "grid": None,
            "lambda_min": 0.1,
            "lambda_max": 4.0,
            "steps": 40,
        },
    )
    lo = _require(eff, "lambda_min", float, lambda v: v > 0, "positive real")
    hi = _require(eff, "lambda_max", float, lambda v: v > lo, "above lambda_min")
    steps = _require(eff, "steps", int, lambda v: v >= 2, "integer >= 2")
    fprime0 = _require(eff, "fprime0", float, lambda v: v > 0, "positive real")
    spec = _shear_from(eff)
    grid = _grid_from(eff)
    field = sample(spec, grid)
    lines = ["lambda,mu,h"]
    for lam in np.linspace(lo, hi, steps):
        mu = mu_of_lambda(field, grid, float(lam), fprime0)
        lines.append(f"{lam:.17g},{mu:.17g},{mu / lam:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    eff = _effective(
        _merged(args, ["fprime0", "grid"]),
        {"deltas": [0.1, 0.2, 0.4, 0.6, 0.8, 1.0], "freqs": [1], "fprime0": 1.0, "grid": None},
    )
    out = args.out or eff.get("out")
    if out is None:
        raise _UsageError("sweep needs --out PATH for the records CSV")
    grid = _grid_from(eff) if eff.get("grid") is not None else None
    config = SweepConfig(
        deltas=tuple(float(d) for d in eff["deltas"]),
        freqs=tuple(int(f) for f in eff["freqs"]),
        fprime0=_require(eff, "fprime0", float, lambda v: v > 0, "positive real"),
        grid=grid,
        output_path=str(out),
        warm_start=bool(eff.get("warm_start", True)),
    )
    records = run_sweep(config)
    print(f"wrote {len(records)} records to {out}")
    return EXIT_OK


def cmd_fit(args) -> int:
    records = read_records(args.records)
    lo, hi = _parse_range(args.range)
    slope = fit_loglog_slope(records, (lo, hi))
    print(f"log-log slope over delta in [{lo:g}, {hi:g}]: {slope:.6f}")
    print(f"slope={slope:.17g}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    eff = _effective(
        _merged(
            args,
            ["delta", "freq", "fprime0", "domain_length", "nx", "ny", "dt", "t_final"],
        ),
        {
            "delta": 0.0,
            "freq": 0,
            "fprime0": 1.0,
            "domain_length": 200.0,
            "nx": 2000,
            "ny": 1,
            "dt": None,
            "t_final": 40.0,
            "front_level": 0.5,
            "measure_window": 0.5,
        },
    )
    config = OracleConfig(
        shear=_shear_from(eff),
        fprime0=_require(eff, "fprime0", float, lambda v: v >= 0, "nonnegative real"),
        domain_length=_require(eff, "domain_length", float, lambda v: v > 0, "positive real"),
        n_x=_require(eff, "nx", int, lambda v: v >= 16, "integer >= 16"),
        n_y=_require(eff, "ny", int, lambda v: v >= 1, "positive integer"),
        dt=None if eff.get("dt") is None else float(eff["dt"]),
        t_final=_require(eff, "t_final", float, lambda v: v > 0, "positive real"),
        front_level=float(eff["front_level"]),
        measure_window=float(eff["measure_window"]),
    )
    trace = evolve(config)
    speed_fit = estimate_speed(trace, config.measure_window)
    if args.out:
        write_trace(trace, args.out)
        meta = {"effective_config": {k: v for k, v in eff.items()}, **trace.meta}
        Path(str(args.out) + ".meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n",
            encoding="utf-8",
        )
        print(f"wrote trace ({len(trace.times)} samples) to {args.out}")
    print(f"fitted front speed over trailing {config.measure_window:.0%}: {speed_fit:.6f}")
    print(f"speed={speed_fit:.17g}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="shearfront", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--delta", type=float, help="shear amplitude (default 0)")
        p.add_argument("--freq", type=int, help="temporal frequency, integer (default 0)")
        p.add_argument("--fprime0", type=float, help="reaction slope at 0 (default 1)")
        p.add_argument("--grid", type=str, help="NYxNT collocation points (default 32x32)")
        p.add_argument("--config", type=str, help="JSON config file; flags override it")

    p = sub.add_parser("speed", help="minimal front speed for one shear")
    common(p)
    p.set_defaults(func=cmd_speed)

    p = sub.add_parser("curve", help="eigenvalue quotient along a decay-rate range")
    common(p)
    p.add_argument("--lambda-min", dest="lambda_min", type=float, help="range start (default 0.1)")
    p.add_argument("--lambda-max", dest="lambda_max", type=float, help="range end (default 4)")
    p.add_argument("--steps", type=int, help="number of samples, >= 2 (default 40)")
    p.add_argument("--out", type=str, help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("sweep", help="amplitude/frequency sweep to a records CSV")
    p.add_argument("--config", type=str, help="JSON config with deltas/freqs lists")
    p.add_argument("--fprime0", type=float, help="reaction slope at 0 (default 1)")
    p.add_argument("--grid", type=str, help="fixed NYxNT grid (default: per-pair policy)")
    p.add_argument("--out", type=str, help="records CSV path (required here or in config)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="log-log slope of enhancement vs amplitude")
    p.add_argument("records", type=str, help="records CSV from the sweep command")
    p.add_argument("--range", type=str, required=True, help="LO:HI amplitude window")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("oracle", help="direct PDE evolution and front-speed fit")
    common(p)
    p.add_argument("--domain-length", dest="domain_length", type=float, help="strip length in x (default 200)")
    p.add_argument("--nx", type=int, help="x grid points (default 2000)")
    p.add_argument("--ny", type=int, help="y grid points (default 1)")
    p.add_argument("--dt", type=float, help="time step (default: stability-based)")
    p.add_argument("--t-final", dest="t_final", type=float, help="horizon (default 40)")
    p.add_argument("--out", type=str, help="trace CSV path")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (RecordParseError, ShearError, GridError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
