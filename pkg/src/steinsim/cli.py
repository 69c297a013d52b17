"""Command-line reports: assessment tables and figure scatter data.

Each subcommand reproduces one batch report (MSE table, power table,
information table, or paired semi-tail points) as CSV or JSON with a run
manifest, under full determinism control (--seed, --samples, --workers).
Progress goes to stderr; data streams stay clean.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, hyptest, mc
from .assess import SingularCovarianceError, assess as assess_cell, mse_with_stderr
from .estimators import EstimatorKind, ShrinkageDomainError
from .hyptest import NullResolutionError

TABLE1_THETAS = (0.0, 0.5, 1.25, 2.0, 2.5)
TABLE2_THETAS = (0.0, 0.5, 1.0, 1.25, 1.5, 2.0, 2.5)
TABLE3_THETAS = TABLE1_THETAS
ALL_FIGURE_THETAS = (0.5, 2.0)

REFERENCE_LINES = {
    "equality": {"slope": 1.0, "intercept": 0.0},
    "one_unit_shift": {"slope": 1.0, "intercept": 1.0},
}

NUMERICAL_ERRORS = (NullResolutionError, SingularCovarianceError,
                    ShrinkageDomainError)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract wants 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _progress(message: str) -> None:
    print(f"[steinsim] {message}", file=sys.stderr, flush=True)


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=14, help="dimension (default 14)")
    p.add_argument("--samples", type=int, default=mc.DEFAULT_SAMPLES,
                   help="Monte Carlo samples per cell (default 1000000)")
    p.add_argument("--seed", type=int, default=mc.DEFAULT_SEED,
                   help=f"base RNG seed (default {mc.DEFAULT_SEED})")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel workers (default 1; results identical)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format (default csv)")
    p.add_argument("--output", default="-",
                   help="output file, or - for stdout (default -)")


def _add_theta_list(p: argparse.ArgumentParser, defaults) -> None:
    p.add_argument("--theta", type=float, action="append", default=None,
                   help=f"theta value, repeatable (default {list(defaults)})")


def _add_alphas(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, action="append", default=None,
                   help="significance level, repeatable (default .01 .05)")


def build_parser() -> _Parser:
    parser = _Parser(prog="steinsim",
                     description="Estimator-assessment reports for the "
                                 "k-dimensional normal-means model.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("table1", help="MSE of the JS and ML estimators")
    _add_common(p1)
    _add_theta_list(p1, TABLE1_THETAS)
    p1.set_defaults(handler=cmd_table1)

    p2 = sub.add_parser("table2", help="power of the JS and ML tests")
    _add_common(p2)
    _add_theta_list(p2, TABLE2_THETAS)
    _add_alphas(p2)
    p2.set_defaults(handler=cmd_table2)

    p3 = sub.add_parser("table3", help="scalar information and efficiency")
    _add_common(p3)
    _add_theta_list(p3, TABLE3_THETAS)
    p3.set_defaults(handler=cmd_table3)

    pf = sub.add_parser("figure", help="paired semi-tail scatter points")
    _add_common(pf)
    pf.add_argument("--theta", type=float, required=True,
                    help="alternative theta for the sample draws")
    pf.add_argument("--points", type=int, default=100,
                    help="number of paired samples (default 100)")
    pf.set_defaults(handler=cmd_figure)

    pa = sub.add_parser("all", help="run every report into a directory")
    _add_common(pa)
    _add_alphas(pa)
    pa.add_argument("--points", type=int, default=100,
                    help="paired samples per figure (default 100)")
    pa.set_defaults(handler=cmd_all)
    # for `all`, --output names a directory
    pa.set_defaults(output="out")

    return parser


def _validate(args) -> None:
    if args.k < 1:
        raise UsageError("--k must be a positive integer")
    if args.samples < 1:
        raise UsageError("--samples must be a positive integer")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    if args.workers < 1:
        raise UsageError("--workers must be a positive integer")
    thetas = getattr(args, "theta", None)
    if isinstance(thetas, list):
        if any(not np.isfinite(t) for t in thetas):
            raise UsageError("--theta values must be finite")
    elif isinstance(thetas, float) and not np.isfinite(thetas):
        raise UsageError("--theta must be finite")
    alphas = getattr(args, "alpha", None)
    if alphas is not None and any(not 0 < a < 1 for a in alphas):
        raise UsageError("--alpha values must lie strictly in (0, 1)")
    points = getattr(args, "points", None)
    if points is not None and points < 1:
        raise UsageError("--points must be a positive integer")


def _config(args, theta: float = 0.0) -> mc.SimulationConfig:
    return mc.SimulationConfig(k=args.k, theta=theta, n_samples=args.samples,
                               seed=args.seed, n_workers=args.workers)


def _manifest(args, command: str, thetas, alphas, t0: float, **extra) -> dict:
    manifest = {
        "command": command,
        "k": args.k,
        "thetas": [float(t) for t in thetas],
        "samples": args.samples,
        "seed": args.seed,
        "workers": args.workers,
        "alphas": [float(a) for a in alphas] if alphas else None,
        "version": __version__,
        "duration_seconds": round(time.perf_counter() - t0, 3),
    }
    manifest.update(extra)
    return manifest


def _render_csv(columns, rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _render_json(command, columns, rows, manifest, extra=None) -> str:
    payload = {"command": command, "columns": list(columns), "rows": rows,
               "manifest": manifest}
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2) + "\n"


def _emit(args, command, columns, rows, manifest, extra=None) -> None:
    """Write one report to stdout or to a file plus manifest sidecar."""
    if args.format == "json":
        text = _render_json(command, columns, rows, manifest, extra)
    else:
        text = _render_csv(columns, rows)
    if args.output == "-":
        sys.stdout.write(text)
        return
    path = Path(args.output)
    path.write_text(text)
    if args.format == "csv":
        sidecar = dict(manifest)
        if extra:
            sidecar.update(extra)
        Path(str(path) + ".manifest.json").write_text(
            json.dumps(sidecar, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Report computation
# ---------------------------------------------------------------------------


def _compute_table1(args, thetas):
    columns = ("estimator", "theta", "mse", "stderr")
    rows = []
    for kind in (EstimatorKind.JS, EstimatorKind.ML):
        for theta in thetas:
            _progress(f"table1 {kind.value} theta={theta:g}")
            value, stderr = mse_with_stderr(kind, theta, _config(args))
            rows.append({"estimator": kind.value.upper(), "theta": float(theta),
                         "mse": value, "stderr": stderr})
    return columns, rows


def _compute_table2(args, thetas, alphas):
    columns = ("test", "alpha", "theta", "power", "stderr")
    null_cfg = _config(args, theta=hyptest.DEFAULT_MU0)
    calibrations = {}
    for kind in (EstimatorKind.JS, EstimatorKind.ML):
        _progress(f"table2 calibrating {kind.value} null")
        calibrations[kind] = hyptest.calibrate_null(kind, null_cfg, alphas)
    results = {}
    for kind in (EstimatorKind.JS, EstimatorKind.ML):
        for theta in thetas:
            _progress(f"table2 {kind.value} theta={theta:g}")
            results[kind, theta] = hyptest.power(kind, theta,
                                                 calibrations[kind],
                                                 _config(args))
    n = args.samples
    rows = []
    for alpha in alphas:
        for kind in (EstimatorKind.JS, EstimatorKind.ML):
            for theta in thetas:
                p = results[kind, theta][alpha]
                rows.append({
                    "test": kind.value.upper(),
                    "alpha": float(alpha),
                    "theta": float(theta),
                    "power": p,
                    "stderr": float(np.sqrt(p * (1.0 - p) / n)),
                })
    return columns, rows


def _compute_table3(args, thetas):
    columns = ("estimator", "theta", "scalar_lambda", "mean_efficiency",
               "eigen_min", "eigen_max")
    rows = []
    eigen_rows = []
    for kind in (EstimatorKind.JS, EstimatorKind.ML):
        for theta in thetas:
            _progress(f"table3 {kind.value} theta={theta:g}")
            report = assess_cell(kind, theta, _config(args))
            rows.append({
                "estimator": kind.value.upper(),
                "theta": float(theta),
                "scalar_lambda": report.scalar_lambda,
                "mean_efficiency": report.mean_efficiency,
                "eigen_min": report.eigen_min,
                "eigen_max": report.eigen_max,
            })
            stderr = report.lambda_stderr
            eigen_rows.append({
                "estimator": kind.value.upper(),
                "theta": float(theta),
                "lambda_stderr": float(stderr) if np.isfinite(stderr) else None,
                "eigenvalues": [float(v) for v in report.eigenvalues],
            })
    return columns, rows, eigen_rows


def _compute_figure(args, theta: float, points: int):
    columns = ("index", "s_js", "s_ml", "shrinkage")
    null_cfg = _config(args, theta=hyptest.DEFAULT_MU0)
    _progress("figure calibrating js null")
    calib_js = hyptest.calibrate_null(EstimatorKind.JS, null_cfg)
    _progress("figure calibrating ml null")
    calib_ml = hyptest.calibrate_null(EstimatorKind.ML, null_cfg)
    _progress(f"figure drawing {points} pairs at theta={theta:g}")
    pairs = hyptest.paired_semitail(theta, points, calib_js, calib_ml,
                                    _config(args))
    rows = [{"index": p.sample_index, "s_js": p.s_js, "s_ml": p.s_ml,
             "shrinkage": p.shrinkage} for p in pairs]
    return columns, rows


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def cmd_table1(args, t0: float) -> int:
    thetas = args.theta if args.theta else TABLE1_THETAS
    columns, rows = _compute_table1(args, thetas)
    _emit(args, "table1", columns, rows,
          _manifest(args, "table1", thetas, None, t0))
    return 0


def cmd_table2(args, t0: float) -> int:
    thetas = args.theta if args.theta else TABLE2_THETAS
    alphas = args.alpha if args.alpha else list(hyptest.DEFAULT_ALPHAS)
    columns, rows = _compute_table2(args, thetas, alphas)
    _emit(args, "table2", columns, rows,
          _manifest(args, "table2", thetas, alphas, t0))
    return 0


def cmd_table3(args, t0: float) -> int:
    thetas = args.theta if args.theta else TABLE3_THETAS
    columns, rows, eigen_rows = _compute_table3(args, thetas)
    manifest = _manifest(args, "table3", thetas, None, t0)
    _emit(args, "table3", columns, rows, manifest,
          extra={"eigenvalue_report": eigen_rows})
    return 0


def cmd_figure(args, t0: float) -> int:
    columns, rows = _compute_figure(args, args.theta, args.points)
    manifest = _manifest(args, "figure", [args.theta], None, t0,
                         points=args.points,
                         reference_lines=REFERENCE_LINES)
    _emit(args, "figure", columns, rows, manifest,
          extra={"reference_lines": REFERENCE_LINES})
    return 0


def cmd_all(args, t0: float) -> int:
    out_dir = Path(args.output if args.output != "-" else "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = args.format
    failures: list[str] = []
    outputs: list[str] = []

    def run_step(name: str, compute):
        try:
            compute()
            outputs.append(name)
        except Exception as exc:  # retain partial outputs, mark the failure
            failures.append(name)
            (out_dir / f"{name}.FAILED").write_text(f"{type(exc).__name__}: {exc}\n")
            _progress(f"{name} FAILED: {exc}")

    def write(name: str, command: str, columns, rows, extra=None):
        path = out_dir / f"{name}.{ext}"
        if ext == "json":
            manifest = _manifest(args, command, [], None, t0)
            path.write_text(_render_json(command, columns, rows, manifest, extra))
        else:
            path.write_text(_render_csv(columns, rows))

    alphas = args.alpha if args.alpha else list(hyptest.DEFAULT_ALPHAS)

    def step_table1():
        columns, rows = _compute_table1(args, TABLE1_THETAS)
        write("table1", "table1", columns, rows)

    def step_table2():
        columns, rows = _compute_table2(args, TABLE2_THETAS, alphas)
        write("table2", "table2", columns, rows)

    def step_table3():
        columns, rows, eigen_rows = _compute_table3(args, TABLE3_THETAS)
        write("table3", "table3", columns, rows)
        (out_dir / "table3_eigenvalues.json").write_text(
            json.dumps(eigen_rows, indent=2) + "\n")

    run_step("table1", step_table1)
    run_step("table2", step_table2)
    run_step("table3", step_table3)
    for theta in ALL_FIGURE_THETAS:
        name = f"figure_theta_{theta:g}"

        def step_figure(theta=theta, name=name):
            columns, rows = _compute_figure(args, theta, args.points)
            write(name, "figure", columns, rows,
                  extra={"reference_lines": REFERENCE_LINES})

        run_step(name, step_figure)

    manifest = _manifest(
        args, "all",
        sorted(set(TABLE1_THETAS) | set(TABLE2_THETAS) | set(ALL_FIGURE_THETAS)),
        alphas, t0,
        points=args.points,
        outputs=outputs,
        failures=failures,
        reference_lines=REFERENCE_LINES,
    )
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if failures:
        _progress(f"completed with failures: {', '.join(failures)}")
        return 2
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    t0 = time.perf_counter()
    try:
        _validate(args)
        return args.handler(args, t0)
    except UsageError as exc:
        print(f"steinsim: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"steinsim: error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"steinsim: numerical failure: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
