"""Run orchestration: configs, the full pipeline, and epsilon sweeps."""

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .envelope import GridFlux, sample_flux
from .errors import InputError, VerificationError
from .potential import PotentialSeries, verify_run
from .rationals import ceil_to_grid, floor_to_grid, parse_rational
from .tracker import (
    Profile,
    Timeline,
    discretize_initial,
    evolve,
    profile_at,
    validate_timeline,
)
from .tracing import WaveSystem, advance_tracing, build_initial_waves, validate_tracing


@dataclass
class RunConfig:
    flux_spec: dict
    epsilon: Fraction
    datum: tuple  # (constant, [(x, value), ...]) raw rationals
    window: tuple = None  # (k_min, k_max) or None for automatic
    seed: int = 0
    emit_svg: bool = False
    restart_check_points: int = 0
    max_events: int = None
    analytic_curvature_bound: Fraction = None
    decimal: bool = False
    raw: dict = field(default_factory=dict)


def _parse_datum(datum) -> tuple:
    if not isinstance(datum, dict):
        raise InputError("datum must be an object")
    constant = parse_rational(datum.get("constant", "0"))
    if "jumps" in datum:
        jumps = [
            (parse_rational(x), parse_rational(v)) for x, v in datum["jumps"]
        ]
    elif "samples" in datum:
        if datum.get("round", "nearest") != "nearest":
            raise InputError("datum.round: only 'nearest' is supported")
        jumps = sorted(
            (parse_rational(x), parse_rational(v))
            for x, v in datum["samples"].items()
        )
    else:
        raise InputError("datum needs a 'jumps' list or a 'samples' table")
    xs = [x for x, _ in jumps]
    if sorted(set(xs)) != xs:
        raise InputError("datum positions must be distinct and increasing")
    return constant, jumps


def parse_run_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    for key in ("flux", "epsilon", "datum"):
        if key not in data:
            raise InputError(f"config field '{key}' is required")
    epsilon = parse_rational(data["epsilon"])
    if epsilon <= 0:
        raise InputError("config field 'epsilon' must be positive")
    window = data.get("window")
    if window is not None:
        window = (int(window[0]), int(window[1]))
        if window[1] <= window[0]:
            raise InputError("config field 'window' must be an increasing pair")
    options = data.get("options", {})
    if not isinstance(options, dict):
        raise InputError("config field 'options' must be an object")
    bound = options.get("analytic_curvature_bound")
    return RunConfig(
        flux_spec=data["flux"],
        epsilon=epsilon,
        datum=_parse_datum(data["datum"]),
        window=window,
        seed=int(data.get("seed", 0)),
        emit_svg=bool(options.get("emit_svg", False)),
        restart_check_points=int(options.get("restart_check_points", 0)),
        max_events=options.get("max_events"),
        analytic_curvature_bound=None if bound is None else parse_rational(bound),
        decimal=bool(options.get("decimal", False)),
        raw=data,
    )


def _auto_window(profile: Profile, epsilon: Fraction) -> tuple:
    lo, hi = profile.value_span()
    k_lo = int(floor_to_grid(lo, epsilon) / epsilon)
    k_hi = int(ceil_to_grid(hi, epsilon) / epsilon)
    if k_hi - k_lo < 2:
        k_lo, k_hi = k_lo - 1, k_lo + 1 + (k_hi - k_lo)
    return k_lo, k_hi


@dataclass
class RunResult:
    config: RunConfig
    flux: GridFlux
    profile: Profile
    timeline: Timeline
    waves: WaveSystem
    series: PotentialSeries

    @property
    def passed(self) -> bool:
        return self.series.all_pass


def run_simulation(cfg: RunConfig) -> RunResult:
    """The full pipeline: sample, discretize, evolve, trace, verify."""
    profile = discretize_initial(cfg.datum, cfg.epsilon)
    window = cfg.window or _auto_window(profile, cfg.epsilon)
    flux = sample_flux(cfg.flux_spec, cfg.epsilon, window)
    tl = evolve(profile, flux, max_events=cfg.max_events)
    validate_timeline(tl)
    ws = advance_tracing(build_initial_waves(profile, cfg.epsilon), tl)
    validate_tracing(tl, ws)
    series = verify_run(tl, ws, flux, restart_checks=cfg.restart_check_points)
    return RunResult(cfg, flux, profile, tl, ws, series)


# -- profile distance -----------------------------------------------------------


def l1_distance(p: Profile, q: Profile) -> Fraction:
    """Exact L1 distance between two profiles; requires matching tails."""
    if p.constant_state != q.constant_state or p.right_constant != q.right_constant:
        raise InputError("profiles with different tails are not L1-comparable")
    xs = sorted({x for x, _ in p.jumps} | {x for x, _ in q.jumps})
    total = Fraction(0)
    for x0, x1 in zip(xs, xs[1:]):
        total += abs(p.value_at(x0) - q.value_at(x0)) * (x1 - x0)
    return total


# -- random families --------------------------------------------------------------


def random_flux_spec(rng: random.Random, max_degree: int = 5) -> dict:
    """Polynomial flux with small rational coefficients; degree >= 2."""
    degree = rng.randint(2, max_degree)
    coeffs = []
    for i in range(degree + 1):
        num = rng.randint(-3, 3)
        if i == degree:
            num = rng.choice([-3, -2, -1, 1, 2, 3])
        coeffs.append(Fraction(num, rng.choice([1, 2, 4])))
    return {"polynomial": [str(c) for c in coeffs]}


def random_datum_spec(rng: random.Random, max_tv: Fraction, n_jumps: int = None) -> dict:
    """A jump datum with values in [-1, 1] and projected variation <= max_tv."""
    n = n_jumps if n_jumps is not None else rng.randint(2, 10)
    positions = sorted(rng.sample(range(0, 16 * n + 16), n))
    heights = []
    value = Fraction(0)
    values = []
    for _ in range(n):
        h = Fraction(rng.choice([-4, -3, -2, -1, 1, 2, 3, 4]), 8)
        if not -1 <= value + h <= 1:
            h = -h
        value += h
        heights.append(h)
        values.append(value)
    raw_tv = sum(abs(h) for h in heights)
    if raw_tv > max_tv:
        scale = Fraction(max_tv) / raw_tv
        values = [v * scale for v in values]
    jumps = [[str(Fraction(x, 16)), str(v)] for x, v in zip(positions, values)]
    return {"constant": "0", "jumps": jumps}


# -- sweeps -----------------------------------------------------------------------


@dataclass
class SweepConfig:
    base: dict
    epsilons: list
    datum: dict = None
    random_family: dict = None
    probe_times: list = field(default_factory=lambda: [Fraction(1)])
    raw: dict = field(default_factory=dict)


def parse_sweep_config(data: dict) -> SweepConfig:
    if not isinstance(data, dict):
        raise InputError("sweep config must be a JSON object")
    if "epsilons" not in data or len(data["epsilons"]) < 2:
        raise InputError("sweep needs at least two epsilons")
    epsilons = [parse_rational(e) for e in data["epsilons"]]
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise InputError("sweep epsilons must strictly decrease")
    if any(e <= 0 for e in epsilons):
        raise InputError("sweep epsilons must be positive")
    base = data.get("base", {})
    datum = data.get("datum")
    random_family = data.get("random")
    if (datum is None) == (random_family is None):
        raise InputError("sweep needs exactly one of 'datum' or 'random'")
    probe_times = [parse_rational(t) for t in data.get("probe_times", ["1"])]
    return SweepConfig(base, epsilons, datum, random_family, probe_times, data)


def _member_config(sweep: SweepConfig, epsilon: Fraction) -> dict:
    cfg = dict(sweep.base)
    cfg["epsilon"] = str(epsilon)
    if sweep.datum is not None:
        cfg["datum"] = sweep.datum
    else:
        fam = sweep.random_family
        rng = random.Random(int(fam.get("seed", 0)))
        cfg.setdefault("flux", random_flux_spec(rng))
        cfg["datum"] = random_datum_spec(
            rng,
            parse_rational(fam.get("max_tv", "2")),
            n_jumps=fam.get("jumps"),
        )
    return cfg


def _sweep_member(arg):
    epsilon_str, cfg_dict, probe_strs = arg
    cfg = parse_run_config(cfg_dict)
    result = run_simulation(cfg)
    series = result.series
    slack = None
    for ev in series.events:
        up_minus = series.slabs[ev.index].upsilon_strict
        up_plus = series.slabs[ev.index + 1].upsilon_strict
        gap = (up_minus - up_plus) - ev.delta_sigma
        slack = gap if slack is None or gap > slack else slack
    profiles = {
        t: profile_at(result.timeline, parse_rational(t)) for t in probe_strs
    }
    return {
        "epsilon": epsilon_str,
        "passed": series.all_pass,
        "failures": series.hard_failures(),
        "K": str(series.K),
        "tv0": str(series.tv0),
        "Q0": str(series.slabs[0].Q),
        "upsilon0_paper": str(series.slabs[0].upsilon_paper),
        "upsilon0_strict": str(series.slabs[0].upsilon_strict),
        "events": len(series.events),
        "max_delta_sigma_slack": None if slack is None else str(slack),
        "_profiles": {
            t: (str(p.constant_state), [(str(x), str(v)) for x, v in p.jumps])
            for t, p in profiles.items()
        },
    }


def sweep(sweep_cfg: SweepConfig, jobs: int = 1) -> list:
    """Run every epsilon member; rows carry the headline numbers plus exact
    L1 distances to the finest member at the probe times."""
    probe_strs = [str(t) for t in sweep_cfg.probe_times]
    args = [
        (str(eps), _member_config(sweep_cfg, eps), probe_strs)
        for eps in sweep_cfg.epsilons
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_member, args))
    else:
        rows = [_sweep_member(a) for a in args]

    failing = [r["epsilon"] for r in rows if not r["passed"]]
    if failing:
        raise VerificationError(
            f"sweep members failed verification: {failing}",
            detail={r["epsilon"]: r["failures"] for r in rows if not r["passed"]},
        )

    def to_profile(packed):
        constant, jumps = packed
        return Profile(
            parse_rational(constant),
            tuple((parse_rational(x), parse_rational(v)) for x, v in jumps),
        )

    finest = rows[-1]
    for row in rows:
        dists = {}
        for t in probe_strs:
            p = to_profile(row["_profiles"][t])
            q = to_profile(finest["_profiles"][t])
            dists[t] = str(l1_distance(p, q))
        row["l1_to_finest"] = dists
        del row["_profiles"]
    return rows


def load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
