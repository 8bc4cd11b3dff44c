#!/usr/bin/env python3
"""
Command-line interface for the max-min exponential sampling operators.

Usage:
    python -m src.harness.cli table --function f-piecewise --kernel ramp --out results/table_f.csv
    python -m src.harness.cli approx --function g --n 10,26,45,75 --format svg --out results/fig_g_mk.svg
    python -m src.harness.cli kernels
    python -m src.harness.cli moments --kernel logistic --order 0,1,2
    python -m src.harness.cli modular --out results/modular.csv
    python -m src.harness.cli rates --function sqrt-log --tau 0.5
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..analysis.convergence import certificate, rate_report, sup_errors
from ..analysis.orlicz import parse_phi, run_modular_experiment
from ..core.errors import ConfigError, EmitError, NumericError
from ..core.kernels import BUILTIN_KINDS, get_kernel, kernel_catalogue, moment, partition_of_unity_residual
from ..core.operators import OPERATORS
from .config import load_config, operator_kwargs, parse_interval, parse_n_list
from .emit import FORMATS, emit, render
from .experiment import (
    PUBLISHED,
    compare_with_published,
    experiment_from_config,
    run_curves,
    run_error_curves,
    run_error_table,
)
from .functions import FUNCTION_ALIASES, make_target
from .tracking import track_table

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

DEFAULT_FORMATS = {
    "approx": "svg",
    "table": "csv",
    "kernels": "json",
    "moments": "json",
    "modular": "csv",
    "rates": "json",
}


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kernel", choices=BUILTIN_KINDS, help="Kernel kind (default from config: ramp)")
    common.add_argument("--n", help="Comma-separated sampling densities, e.g. 10,25,45")
    common.add_argument("--interval", help="Interval a,b with 0 < a < b (default 0.05,2)")
    common.add_argument(
        "--function", help="f-piecewise, g-oscillatory, log-linear, sqrt-log, constant(c) or expr:<expression in x>"
    )
    common.add_argument("--out", help="Output file (printed to stdout when omitted)")
    common.add_argument("--format", choices=FORMATS, help="Output format (default depends on the subcommand)")
    common.add_argument("--config", help="Extra YAML config file, applied after configs/*.yaml")
    common.add_argument("--jobs", type=int, help="Parallel workers for per-n rows (joblib n_jobs)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    common.add_argument("-q", "--quiet", action="store_true", help="Only log errors")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="maxmin",
        description="Max-min exponential sampling neural network operators",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("Usage:")[1],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    approx = sub.add_parser("approx", parents=[common], help="Approximation (or error) curves on a grid")
    approx.add_argument("--points", type=int, help="Grid points (default grid.curve_points)")
    approx.add_argument("--op", help="Operators, comma-separated subset of gm,mk")
    approx.add_argument("--errors", action="store_true", help="Emit |F - Op(F)| instead of Op(F)")
    approx.add_argument("--experiment", help="Named experiment from configs/experiments.yaml")

    table = sub.add_parser("table", parents=[common], help="L1 and sup error table over n")
    table.add_argument("--experiment", help="Named experiment from configs/experiments.yaml")
    table.add_argument("--track", action="store_true", help="Log the run to MLflow (MLFLOW_TRACKING_URI)")

    sub.add_parser("kernels", parents=[common], help="Kernel catalogue: support, Psi(e), moments")

    moments = sub.add_parser("moments", parents=[common], help="Generalized absolute moments of a kernel")
    moments.add_argument("--order", default="0,1,2", help="Comma-separated moment orders")
    moments.add_argument("--truncation", type=int, default=60, help="Index truncation K")

    sub.add_parser("modular", parents=[common], help="Modular errors from configs/orlicz.yaml")

    rates = sub.add_parser("rates", parents=[common], help="Fitted convergence order of the sup-error")
    rates.add_argument("--tau", type=float, help="Log-Hölder order of the target (default rates.tau)")
    rates.add_argument("--op", choices=OPERATORS, default="mk", help="Operator (default mk)")
    return parser


def _configure_logging(args) -> None:
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    if args.quiet:
        level = logging.ERROR
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _overrides(args) -> Dict:
    return {
        "kernel": args.kernel,
        "function": args.function,
        "interval": list(parse_interval(args.interval)) if args.interval else None,
        "n_list": parse_n_list(args.n) if args.n else None,
        "n_jobs": args.jobs,
    }


def _flag_changes(args) -> Dict:
    """Explicit flags win over a named experiment entry."""
    return {
        "function_id": args.function,
        "kernel": args.kernel,
        "n_list": parse_n_list(args.n) if args.n else None,
        "interval": parse_interval(args.interval) if args.interval else None,
    }


def _formats(args, exp=None) -> List[str]:
    """--format wins, then the experiment's outputs, then the subcommand default."""
    if args.format:
        return [args.format]
    if exp is not None and exp.outputs:
        return list(exp.outputs)
    return [DEFAULT_FORMATS[args.command]]


def _output(payload, args, exp=None) -> None:
    formats = _formats(args, exp)
    if not args.out:
        sys.stdout.write(render(payload, formats[0]))
        return
    for fmt in formats:
        target = args.out if len(formats) == 1 else str(Path(args.out).with_suffix("." + fmt))
        path = emit(payload, fmt, target)
        print(f"✅ wrote {path}")


def cmd_approx(args, cfg) -> int:
    changes = _flag_changes(args)
    if args.op:
        changes["operators"] = [op.strip() for op in args.op.split(",") if op.strip()]
    exp = experiment_from_config(cfg, name=args.experiment, **changes)
    points = args.points or cfg["grid"]["curve_points"]
    runner = run_error_curves if args.errors else run_curves
    curves = runner(exp, points=points)
    for (op, n), values in curves.curves.items():
        logger.info("%s n=%d: %d points, max %.6f", op, n, len(values), float(np.max(values)))
    _output(curves, args, exp)
    return EXIT_OK


def _print_table(rows) -> None:
    print(f"{'n':>6} {'gm_l1':>10} {'mk_l1':>10} {'gm_sup':>10} {'mk_sup':>10}")
    for r in rows:
        flag = "  (empty window)" if r.empty_window else ""
        print(f"{r.n:>6} {r.gm_l1:>10.6f} {r.mk_l1:>10.6f} {r.gm_sup:>10.6f} {r.mk_sup:>10.6f}{flag}")


def cmd_table(args, cfg) -> int:
    exp = experiment_from_config(cfg, name=args.experiment, **_flag_changes(args))
    rows = run_error_table(exp, n_jobs=int(cfg["n_jobs"]))
    if args.out or args.format:
        _output(rows, args, exp)
    else:
        _print_table(rows)

    if exp.function_id in PUBLISHED and exp.kernel == "ramp":
        cmp = compare_with_published(rows, exp.function_id)
        for d in cmp.deviations:
            logger.info("n=%d gm %.1f%% mk %.1f%% off published", d["n"], 100 * d["gm_rel"], 100 * d["mk_rel"])
        band = "✅" if cmp.within_band else "⚠️ "
        order = "✅" if cmp.orderings_hold else "⚠️ "
        print(f"{band} published L1 values within ±35%: {cmp.within_band}", file=sys.stderr)
        print(
            f"{order} orderings (decreasing in n: {cmp.decreasing}, mk < gm: {cmp.mk_below_gm})",
            file=sys.stderr,
        )
        if not cmp.orderings_hold and cmp.known_deviation:
            print(f"   known deviation: {cmp.known_deviation}", file=sys.stderr)
            print(f"   errors fall from n={rows[0].n} to n={rows[-1].n}: {cmp.overall_decrease}", file=sys.stderr)

    if any(r.empty_window for r in rows):
        flagged = ", ".join(str(r.n) for r in rows if r.empty_window)
        print(f"⚠️  empty index window for n = {flagged}", file=sys.stderr)

    if args.track:
        run_id = track_table(exp, rows, artifact=args.out)
        print(f"✅ tracked MLflow run {run_id}", file=sys.stderr)
    return EXIT_OK


def cmd_kernels(args, cfg) -> int:
    kinds = [args.kernel] if args.kernel else list(BUILTIN_KINDS)
    _output(kernel_catalogue(kinds), args)
    return EXIT_OK


def cmd_moments(args, cfg) -> int:
    try:
        orders = [float(x) for x in args.order.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"--order must be comma-separated numbers, got {args.order!r}") from exc
    kernel = get_kernel(cfg["kernel"])
    s = np.linspace(0.0, 1.0, 257)
    payload = {
        "kind": kernel.kind,
        "truncation": args.truncation,
        "moments": {f"{j:g}": moment(kernel, j, truncation=args.truncation) for j in orders},
        "partition_of_unity_residual": float(np.max(partition_of_unity_residual(kernel, s, args.truncation))),
    }
    if args.out:
        _output(payload, args)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_modular(args, cfg) -> int:
    section = cfg["modular"]
    interval = tuple(cfg["interval"])
    function_id = args.function or section["function"]
    n_list = parse_n_list(args.n) if args.n else parse_n_list(section["n_list"])
    F = make_target(function_id, interval)
    etas = [parse_phi(spec) for spec in section["etas"]]
    rows = run_modular_experiment(
        F,
        get_kernel(cfg["kernel"]),
        etas,
        [float(lam) for lam in section["lambdas"]],
        n_list,
        grid_cells=int(section["cells"]),
        **operator_kwargs(cfg),
    )
    _output(rows, args)
    return EXIT_OK


def cmd_rates(args, cfg) -> int:
    section = cfg["rates"]
    function_id = args.function or section["function"]
    tau = float(args.tau if args.tau is not None else section["tau"])
    if not 0 < tau <= 1:
        raise ConfigError(f"--tau must lie in (0, 1], got {tau}")
    n_list = parse_n_list(args.n) if args.n else parse_n_list(section["n_list"])
    F = make_target(function_id, tuple(cfg["interval"]))
    kernel = get_kernel(cfg["kernel"])
    samples = sup_errors(
        F,
        kernel,
        n_list,
        which=args.op,
        grid_points=cfg["grid"]["table_points"],
        **operator_kwargs(cfg),
    )
    report = rate_report(samples, theoretical_order=tau / (1.0 + tau))
    mark = "✅" if report.fitted_order >= report.theoretical_order else "⚠️ "
    print(
        f"{mark} {args.op} on {F.name}: fitted order {report.fitted_order:.4f} "
        f"vs floor tau/(1+tau) = {report.theoretical_order:.4f}",
        file=sys.stderr,
    )
    cert = certificate(
        F, kernel, n_list[-1], which=args.op, exponent=cfg["null_sequence_exponent"], grid_points=cfg["grid"]["table_points"]
    )
    mark = "✅" if cert["measured"] <= cert["bound"] else "⚠️ "
    print(f"{mark} n={cert['n']}: sup-error {cert['measured']:.6f} vs bound {cert['bound']:.6f}", file=sys.stderr)
    _output(report, args)
    return EXIT_OK


COMMANDS = {
    "approx": cmd_approx,
    "table": cmd_table,
    "kernels": cmd_kernels,
    "moments": cmd_moments,
    "modular": cmd_modular,
    "rates": cmd_rates,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)
    try:
        if args.function:
            args.function = FUNCTION_ALIASES.get(args.function, args.function)
        cfg = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"❌ configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"❌ numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EmitError as exc:
        print(f"❌ could not write output: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
