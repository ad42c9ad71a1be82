"""Command line entry points.

Exit status: 0 when every hard check passes, 1 on a verification failure,
2 on malformed input or configuration.
"""

import argparse
import sys
from pathlib import Path

from .diagram import render_front_diagram, render_potential_plot
from .errors import InputError, TrackerError, VerificationError
from .harness import load_json, parse_run_config, parse_sweep_config, run_simulation, sweep
from .report import build_report, events_csv, potential_csv, report_bytes, verify_report

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_INPUT = 2


def _cmd_run(args) -> int:
    cfg = parse_run_config(load_json(args.config))
    if args.restart_checks is not None:
        cfg.restart_check_points = args.restart_checks
    if args.svg:
        cfg.emit_svg = True
    if args.decimal:
        cfg.decimal = True
    try:
        result = run_simulation(cfg)
    except TrackerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = build_report(result)
    (out_dir / "report.json").write_bytes(report_bytes(report))
    (out_dir / "events.csv").write_text(events_csv(report, cfg.decimal))
    (out_dir / "potential.csv").write_text(potential_csv(report, cfg.decimal))
    if cfg.emit_svg:
        (out_dir / "fronts.svg").write_text(render_front_diagram(result.timeline))
        (out_dir / "potential.svg").write_text(
            render_potential_plot(result.series, result.timeline)
        )

    failures = result.series.hard_failures()
    if failures:
        print(f"verification FAILED: {failures}", file=sys.stderr)
        return EXIT_VERIFICATION
    print(
        f"ok: {len(result.series.events)} events, K={result.series.K}, "
        f"TV0={result.series.tv0}, Q0={result.series.slabs[0].Q} "
        f"-> {out_dir / 'report.json'}"
    )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = parse_sweep_config(load_json(args.config))
    rows = sweep(cfg, jobs=args.jobs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    import json

    (out_dir / "sweep.json").write_text(json.dumps(rows, indent=2) + "\n")
    header = [
        "epsilon", "K", "tv0", "Q0", "upsilon0_paper", "upsilon0_strict",
        "events", "max_delta_sigma_slack",
    ]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if row[h] is None else str(row[h]) for h in header))
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    for row in rows:
        print(
            f"eps={row['epsilon']}: events={row['events']} Q0={row['Q0']} "
            f"upsilon0={row['upsilon0_strict']} l1_to_finest={row['l1_to_finest']}"
        )
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = load_json(args.report)
    failures = verify_report(report)
    if failures:
        for f in failures:
            print(f"FAIL: {f}", file=sys.stderr)
        return EXIT_VERIFICATION
    print("report verifies: all stored verdicts re-check and hold")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fronttrack",
        description="Exact front tracking with interaction-potential verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one config and emit artifacts")
    p_run.add_argument("config")
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--svg", action="store_true")
    p_run.add_argument("--restart-checks", type=int, default=None)
    p_run.add_argument("--decimal", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a family of epsilons")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--out", default="out")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="re-check a stored report")
    p_verify.add_argument("report")
    p_verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"verification FAILED: {exc}", file=sys.stderr)
        if exc.detail:
            print(f"  {exc.detail}", file=sys.stderr)
        return EXIT_VERIFICATION
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
