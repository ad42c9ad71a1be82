"""Artifact emission and re-checking: report.json, events.csv, potential.csv.

All rationals are serialized as canonical "p/q" strings; the optional decimal
columns are a plotting convenience, never the primary record.  Reports are
byte-deterministic for a fixed config: keys are emitted in a fixed order and
every value is either a string, an int, a bool or a nested structure of the
same.
"""

import csv
import io
import json
from fractions import Fraction

from .errors import InputError
from .harness import RunResult
from .potential import HARD_EVENT_VERDICTS
from .rationals import format_rational, parse_rational

EVENTS_COLUMNS = [
    "t", "x", "kind", "a", "b", "c",
    "delta_sigma", "Q_minus", "Q_plus", "TV_minus", "TV_plus",
]
POTENTIAL_COLUMNS = [
    "t_lo", "t_hi", "Q", "TV", "upsilon_paper", "upsilon_strict", "bianchini",
]


def _r(x) -> str:
    return format_rational(x)


def build_report(result: RunResult) -> dict:
    series = result.series
    events = []
    for ev in series.events:
        events.append(
            {
                "index": ev.index,
                "t": _r(ev.t),
                "x": _r(ev.x),
                "kind": ev.kind,
                "a": _r(ev.a),
                "b": _r(ev.b),
                "c": _r(ev.c),
                "delta_sigma": _r(ev.delta_sigma),
                "Q_minus": _r(ev.Q_minus),
                "Q_plus": _r(ev.Q_plus),
                "TV_minus": _r(ev.TV_minus),
                "TV_plus": _r(ev.TV_plus),
                "composite": ev.composite,
                "verdicts": dict(sorted(ev.verdicts.items())),
            }
        )
    slabs = []
    for rec in series.slabs:
        slabs.append(
            {
                "index": rec.index,
                "t_lo": _r(rec.t_lo),
                "t_hi": None if rec.t_hi is None else _r(rec.t_hi),
                "Q": _r(rec.Q),
                "TV": _r(rec.TV),
                "upsilon_paper": _r(rec.upsilon_paper),
                "upsilon_strict": _r(rec.upsilon_strict),
                "bianchini": _r(rec.bianchini),
            }
        )
    restart_checks = [
        {
            "slab": rc.slab,
            "t": _r(rc.t),
            "Q": _r(rc.Q_original),
            "Q_restart": _r(rc.Q_restart),
            "equal": rc.equal,
        }
        for rc in series.restart_checks
    ]
    report = {
        "run_config": result.config.raw,
        "epsilon": _r(result.config.epsilon),
        "window": [result.flux.k_min, result.flux.k_max],
        "K": _r(series.K),
        "analytic_curvature_bound": (
            None
            if result.config.analytic_curvature_bound is None
            else _r(result.config.analytic_curvature_bound)
        ),
        "TV0": _r(series.tv0),
        "atom_count": result.waves.atom_count,
        "initial_front_count": len(result.timeline.slabs[0].fronts),
        "event_count": len(series.events),
        "max_weight": _r(series.max_weight),
        "all_pass": series.all_pass,
        "hard_failures": series.hard_failures(),
        "flags": {
            "upsilon0_le_k_tv0_sq": series.flags["upsilon0_le_k_tv0_sq"],
            "upsilon0_le_2k_tv0_sq": series.flags["upsilon0_le_2k_tv0_sq"],
            "upsilon_paper_drop_failures": list(series.flags["upsilon_paper_drop_failures"]),
        },
        "events": events,
        "slabs": slabs,
        "restart_checks": restart_checks,
    }
    return report


def report_bytes(report: dict) -> bytes:
    return (json.dumps(report, indent=2, sort_keys=False) + "\n").encode("utf-8")


def events_csv(report: dict, decimal: bool = False) -> str:
    out = io.StringIO()
    cols = list(EVENTS_COLUMNS)
    if decimal:
        cols += [c + "_float" for c in EVENTS_COLUMNS if c != "kind"]
    writer = csv.DictWriter(out, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for ev in report["events"]:
        row = {c: ev[c] for c in EVENTS_COLUMNS}
        if decimal:
            for c in EVENTS_COLUMNS:
                if c != "kind":
                    row[c + "_float"] = repr(float(Fraction(ev[c])))
        writer.writerow(row)
    return out.getvalue()


def potential_csv(report: dict, decimal: bool = False) -> str:
    out = io.StringIO()
    cols = list(POTENTIAL_COLUMNS)
    if decimal:
        cols += [c + "_float" for c in POTENTIAL_COLUMNS]
    writer = csv.DictWriter(out, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for rec in report["slabs"]:
        row = {c: rec[c] for c in POTENTIAL_COLUMNS}
        if row["t_hi"] is None:
            row["t_hi"] = "inf"
        if decimal:
            for c in POTENTIAL_COLUMNS:
                raw = rec[c]
                if raw is None:
                    row[c + "_float"] = "inf"
                else:
                    row[c + "_float"] = repr(float(Fraction(raw)))
        writer.writerow(row)
    return out.getvalue()


def verify_report(report: dict) -> list:
    """Re-check every stored verdict and identity from the stored rationals.

    Returns a list of failure descriptions; an empty list means the report is
    internally consistent and all hard checks hold.
    """
    failures = []
    try:
        K = parse_rational(report["K"])
        tv0 = parse_rational(report["TV0"])
        slabs = report["slabs"]
        events = report["events"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"report is missing required fields: {exc}") from exc

    by_index = {}
    for rec in slabs:
        q = parse_rational(rec["Q"])
        tv = parse_rational(rec["TV"])
        up = parse_rational(rec["upsilon_paper"])
        us = parse_rational(rec["upsilon_strict"])
        by_index[rec["index"]] = (q, tv, up, us)
        if up != K * tv0 * tv + q:
            failures.append(f"slab{rec['index']}: upsilon_paper inconsistent")
        if us != K * tv0 * tv + 2 * q:
            failures.append(f"slab{rec['index']}: upsilon_strict inconsistent")
        if q > K * tv * tv:
            failures.append(f"slab{rec['index']}: Q exceeds K*TV^2")

    for ev in events:
        idx = ev["index"]
        dsig = parse_rational(ev["delta_sigma"])
        q_minus, q_plus = parse_rational(ev["Q_minus"]), parse_rational(ev["Q_plus"])
        tv_minus, tv_plus = parse_rational(ev["TV_minus"]), parse_rational(ev["TV_plus"])
        sm, _, up_m, us_m = by_index[idx]
        sp, _, up_p, us_p = by_index[idx + 1]
        if (sm, sp) != (q_minus, q_plus):
            failures.append(f"event{idx}: Q columns disagree with slab table")
        recomputed = {
            "q_monotone": q_minus >= q_plus,
            "delta_sigma_le_upsilon_strict_drop": dsig <= us_m - us_p,
            "delta_sigma_le_upsilon_paper_drop": dsig <= up_m - up_p,
            "upsilon_paper_monotone": up_p <= up_m,
            "upsilon_strict_monotone": us_p <= us_m,
        }
        if not ev.get("composite", False):
            if ev["kind"] == "same_sign":
                recomputed["half_delta_sigma_le_q_drop"] = dsig / 2 <= q_minus - q_plus
            else:
                a, b, c = (parse_rational(ev[k]) for k in "abc")
                recomputed["cancellation_curvature_bound"] = (
                    dsig <= K * abs(c - a) * abs(c - b)
                )
                recomputed["cancellation_tv_bound"] = (
                    dsig <= K * tv0 * (tv_minus - tv_plus)
                )
        for name, value in recomputed.items():
            if ev["verdicts"].get(name) != value:
                failures.append(f"event{idx}: stored verdict {name} does not re-check")
        for name in HARD_EVENT_VERDICTS:
            if name in recomputed and not recomputed[name]:
                failures.append(f"event{idx}: {name} fails")

    for rc in report.get("restart_checks", []):
        equal = parse_rational(rc["Q"]) == parse_rational(rc["Q_restart"])
        if rc["equal"] != equal or not equal:
            failures.append(f"restart@slab{rc['slab']}: potential not reproduced")
    return failures
