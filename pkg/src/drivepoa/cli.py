"""Command-line front end: bounds tables, example curves and scenario solving."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import serialization as ser
from .bounds import bound_sweep
from .costs import as_fraction
from .game import DEFAULT_CAP, UNDEFINED, EnumerationCapError, poa_check, price_of_anarchy, sampled_price_of_anarchy
from .scenarios import (
    ANALYTIC_OVERLAYS,
    TRAJECTORY_CAP,
    TrajectoryCapError,
    analytic_curve,
    build_scenario,
    distance_grid,
    example1_curves,
    example2_curves,
    with_personal_scale,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _decimal_grid(stop: str, step: str) -> list[float]:
    # exact decimal arithmetic keeps 0.1-steps free of drift
    s, h = as_fraction(stop), as_fraction(step)
    if h <= 0:
        raise ValueError("step must be positive")
    n = int(s / h)
    return [float(i * h) for i in range(n + 1)]


def _monotone_ok(results) -> list[str]:
    problems = []
    by_d: dict[int, list] = {}
    for r in results:
        by_d.setdefault(r.d, []).append(r)
    for d, rows in by_d.items():
        for a, b in zip(rows, rows[1:]):
            if not b.bound < a.bound:
                problems.append(f"d={d}: bound not decreasing at alpha={b.alpha_star}")
            if b.root > a.root + 1e-12:
                problems.append(f"d={d}: root increases at alpha={b.alpha_star}")
            if b.k > a.k:
                problems.append(f"d={d}: k increases at alpha={b.alpha_star}")
        for r in rows:
            if r.bound < 1:
                problems.append(f"d={d}: bound below 1 at alpha={r.alpha_star}")
    return problems


def cmd_bounds(args) -> int:
    alphas = _decimal_grid(args.alpha_max, args.alpha_step)
    results = bound_sweep(args.d, alphas)
    if args.format == "json":
        text = json.dumps([r.__dict__ for r in results], indent=2) + "\n"
    else:
        text = ser.bounds_csv(results)
    _emit(text, args.out)
    problems = _monotone_ok(results)
    for p in problems:
        print(f"check failed: {p}", file=sys.stderr)
    return EXIT_CHECK_FAILED if problems else EXIT_OK


def cmd_curve(args) -> int:
    if args.kind == "two-car":
        deltas = distance_grid(args.delta_max, args.delta_step)
        tables = example1_curves(deltas)
        if args.with_analytic:
            tables += [analytic_curve(n, spec, deltas) for n, spec in ANALYTIC_OVERLAYS.items()]
    else:
        tables = example2_curves()
    if args.format == "json":
        payload = [
            {
                "curve": t.name,
                "abscissa_label": t.abscissa_label,
                "rows": [[r.abscissa, float(r.raw), float(r.normalized)] for r in t.rows],
            }
            for t in tables
        ]
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = ser.curves_csv(tables)
    _emit(text, args.out)
    return EXIT_OK


def _solve(spec, args):
    game = build_scenario(spec, cap=TRAJECTORY_CAP)
    if args.sampled:
        rng = np.random.default_rng(args.seed)
        report = sampled_price_of_anarchy(game, args.samples, rng)
    else:
        report = price_of_anarchy(game, cap=args.cap)
    bound, ok = poa_check(report)
    return game, report, bound, ok


def _summary(name: str, report, bound, ok: bool) -> str:
    poa = report.poa if report.poa == UNDEFINED else f"{float(report.poa):.6f} ({report.poa})"
    alpha = report.alpha_star if isinstance(report.alpha_star, str) else f"{float(report.alpha_star):.6f}"
    rows = [
        ("scenario", name or "-"),
        ("mode", "sampled" if report.sampled else "exact"),
        ("profiles", str(report.n_profiles)),
        ("degree d", str(report.degree)),
        ("NE count", str(len(report.nash_profiles))),
        ("worst NE cost", f"{float(report.worst_ne_cost):.6f}"),
        ("optimum cost", f"{float(report.best_cost):.6f}"),
        (report.poa_label, poa),
        ("empirical alpha*", alpha),
        ("refined bound", f"{float(bound):.6f}"),
        ("within bound", "yes" if ok else "NO"),
    ]
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def cmd_solve(args) -> int:
    spec = ser.load_scenario(args.file)
    _, report, bound, ok = _solve(spec, args)
    text = json.dumps(ser.report_to_dict(report, bound, ok), indent=2) + "\n"
    _emit(text, args.out)
    summary = _summary(spec.name or Path(args.file).stem, report, bound, ok)
    (sys.stderr if args.out is None else sys.stdout).write(summary)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_sweep_alpha(args) -> int:
    """Solve the scenario with personal costs scaled by each factor."""
    spec = ser.load_scenario(args.file)
    factors = [as_fraction(f) for f in args.factors.split(",") if f.strip()]
    rows = []
    all_ok = True
    for f in factors:
        _, report, bound, ok = _solve(with_personal_scale(spec, f), args)
        all_ok &= ok
        rows.append((f, report, bound, ok))
    if args.format == "json":
        payload = [
            {"factor": str(f), **ser.report_to_dict(report, bound, ok)} for f, report, bound, ok in rows
        ]
        text = json.dumps(payload, indent=2) + "\n"
    else:
        header = ("factor", "alpha_star", "nash_count", "poa", "bound", "within_bound")
        lines = []
        for f, report, bound, ok in rows:
            alpha = report.alpha_star
            lines.append(
                [
                    ser.fmt(f),
                    alpha if isinstance(alpha, str) else ser.fmt(alpha),
                    len(report.nash_profiles),
                    report.poa if report.poa == UNDEFINED else ser.fmt(report.poa),
                    ser.fmt(bound),
                    int(ok),
                ]
            )
        text = ser.table_csv(header, lines)
    _emit(text, args.out)
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def _common(default_format: str = "csv") -> argparse.ArgumentParser:
    # a fresh parent per subcommand: argparse shares parent actions, so
    # per-subcommand defaults would otherwise leak into each other
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=default_format)
    common.add_argument("--seed", type=int, default=0, help="RNG seed for sampled mode")
    return common


def _solving() -> argparse.ArgumentParser:
    solving = argparse.ArgumentParser(add_help=False)
    solving.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max profiles to enumerate")
    solving.add_argument("--sampled", action="store_true", help="better-response sampling instead of enumeration")
    solving.add_argument("--samples", type=int, default=200, help="better-response runs in sampled mode")
    return solving


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drivepoa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[_common()], help="PoA bound table over degrees and alpha*")
    p.add_argument("--d", type=_int_list, default=[1, 2, 3, 4], help="comma-separated degrees")
    p.add_argument("--alpha-max", default="10")
    p.add_argument("--alpha-step", default="0.1")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("curve", parents=[_common()], help="example cost curves")
    p.add_argument("kind", choices=("two-car", "multi-car"))
    p.add_argument("--delta-max", type=float, default=14.0)
    p.add_argument("--delta-step", type=float, default=0.25)
    p.add_argument("--with-analytic", action="store_true", help="add the analytic proximity overlays")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("solve", parents=[_common("json"), _solving()], help="equilibria and PoA of a scenario file")
    p.add_argument("file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep-alpha", parents=[_common(), _solving()], help="PoA as personal costs are scaled")
    p.add_argument("file")
    p.add_argument("--factors", default="0,0.25,0.5,1,2,4,8")
    p.set_defaults(func=cmd_sweep_alpha)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ser.ScenarioError as exc:
        print(f"{getattr(args, 'file', '')}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EnumerationCapError, TrajectoryCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
