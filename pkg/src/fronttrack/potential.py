"""Interaction accounting: speed changes, pair weights, and the potentials.

The speed change of an interaction is an envelope-slope integral over the
states involved; with grid-aligned states it is an exact finite sum over
state cells.  Each ordered pair of waves (w < w') carries a weight q:

* K (the flux curvature constant) when the live waves between them mix signs,
* 0 when they share a position or will never share one,
* pi/d otherwise, where d is the mass of the waves present at the pair's
  first future meeting and pi is the positive part of the gap between the
  entropic speeds the meeting assigns to w and w'.

Q(t) integrates q over ordered pairs; it is constant between events, drops
at events, and its drop at a same-sign interaction dominates half the speed
change there.  Everything is evaluated per slab at atom granularity, where
all quantities are piecewise constant, so the double integral is an exact
finite sum.  Adding K * TV(initial) * TV(current) yields the combined
functionals (`upsilon`); the variant with the Q term doubled is the one
whose event drops dominate the full speed change.

All classifications look only forward in time: they depend on front
membership in the current slab and on the event list from the slab onward,
never on how the profile got there.  The restart checks in `verify_run`
exercise exactly that property.
"""

from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .envelope import (
    CurvatureConstant,
    GridFlux,
    convex_envelope,
    curvature_constant,
    envelope,
)
from .errors import ConsistencyError, InputError
from .rationals import grid_index
from .tracker import (
    CANCELLATION,
    SAME_SIGN,
    InteractionEvent,
    Timeline,
    evolve,
    profile_at,
)
from .tracing import (
    WaveCell,
    WaveSystem,
    advance_tracing,
    build_initial_waves,
    first_common_event,
)

MIXED_SIGN = "mixed_sign"
SAME_POSITION = "same_position"
NEVER_INTERACT = "never_interact"
GENERIC = "generic"


# -- speed change ----------------------------------------------------------------


@lru_cache(maxsize=None)
def _cell_slopes(flux: GridFlux, lo: int, hi: int, sign: int):
    """Envelope slope on each state cell k in [lo, hi) for the given sign."""
    env = envelope(flux, lo * flux.epsilon, hi * flux.epsilon, sign)
    out = {}
    for x0, x1, s in env.pieces():
        for k in range(grid_index(x0, flux.epsilon), grid_index(x1, flux.epsilon)):
            out[k] = s
    return out


def _slope_gap_integral(flux, span_a, span_b, over, sign):
    """Integral over ``over`` of |envelope-slope(span_a) - envelope-slope(span_b)|."""
    sa = _cell_slopes(flux, *span_a, sign)
    sb = _cell_slopes(flux, *span_b, sign)
    total = Fraction(0)
    for k in range(*over):
        total += abs(sa[k] - sb[k])
    return total * flux.epsilon


def _same_sign_triple(a, b, c, flux) -> Fraction:
    if a < b < c:
        sign = 1
        ia, ib, ic = (grid_index(u, flux.epsilon) for u in (a, b, c))
        return _slope_gap_integral(flux, (ia, ib), (ia, ic), (ia, ib), sign) + \
            _slope_gap_integral(flux, (ib, ic), (ia, ic), (ib, ic), sign)
    if a > b > c:
        sign = -1
        ia, ib, ic = (grid_index(u, flux.epsilon) for u in (a, b, c))
        return _slope_gap_integral(flux, (ib, ia), (ic, ia), (ib, ia), sign) + \
            _slope_gap_integral(flux, (ic, ib), (ic, ia), (ic, ib), sign)
    raise InputError("same-sign speed change needs a monotone state triple")


def _cancellation_triple(a, b, c, flux) -> Fraction:
    if a == c:
        return Fraction(0)
    sign = 1 if c > a else -1
    survivor = (min(a, c), max(a, c))
    bigger = (min(a, b), max(a, b)) if abs(b - a) > abs(b - c) else (min(b, c), max(b, c))
    i_surv = tuple(grid_index(u, flux.epsilon) for u in survivor)
    i_big = tuple(grid_index(u, flux.epsilon) for u in bigger)
    return _slope_gap_integral(flux, i_surv, i_big, i_surv, sign)


def _sequential_steps(event: InteractionEvent):
    """The left-to-right pairwise merge steps of a composite event."""
    states = event.chain_states
    p, q = states[0], states[1]
    steps = []
    for r in states[2:]:
        if p == q:
            q = r
            continue
        steps.append((p, q, r))
        q = r
    return steps


def delta_sigma(event: InteractionEvent, flux: GridFlux) -> Fraction:
    """Total speed change of an event; composite events sum their merge steps."""
    total = Fraction(0)
    for p, q, r in _sequential_steps(event):
        if (r > q) == (q > p):
            total += _same_sign_triple(p, q, r, flux)
        else:
            total += _cancellation_triple(p, q, r, flux)
    return total


def delta_sigma_same_sign(event: InteractionEvent, flux: GridFlux) -> Fraction:
    if event.kind != SAME_SIGN:
        raise InputError("event is not a same-sign interaction")
    return delta_sigma(event, flux)


def delta_sigma_cancellation(event: InteractionEvent, flux: GridFlux) -> Fraction:
    if event.kind != CANCELLATION:
        raise InputError("event is not a cancellation")
    return delta_sigma(event, flux)


def delta_sigma_closed_form(event: InteractionEvent) -> Fraction:
    """2 (s' - s'') |jump'||jump''| / (|jump'| + |jump''|) for a binary
    same-sign interaction; equals the envelope integral exactly there."""
    if event.kind != SAME_SIGN or len(event.incoming) != 2:
        raise InputError("closed form applies to binary same-sign events")
    left, right = event.incoming
    s_l, s_r = left.strength, right.strength
    return 2 * (left.speed - right.speed) * s_l * s_r / (s_l + s_r)


# -- pair weights and Q ------------------------------------------------------------


@dataclass(frozen=True)
class PairWeightRecord:
    atom_lo: int
    atom_hi: int
    classification: str
    q: Fraction
    pi: Fraction
    d: Fraction
    j_left: object = None  # WaveInterval for generic pairs
    j_right: object = None
    meeting: object = None  # (t, x) of the first joint event


def _k_value(K) -> Fraction:
    return K.K if isinstance(K, CurvatureConstant) else Fraction(K)


def _atom_id(ws: WaveSystem, c) -> int:
    if isinstance(c, int):
        if not 0 <= c < ws.atom_count:
            raise InputError(f"atom index {c} out of range")
        return c
    if isinstance(c, WaveCell):
        if len(c.atoms) != 1:
            raise InputError("pair weights are defined per atom; split the cell")
        return c.atoms[0]
    return ws.atom_of(Fraction(c))


def _j_interval(ws, s, fid, event_index):
    """Waves at the front's position that will sit at the joint event: the
    front's slab-s atoms that survive that event."""
    survivors = ws.survivor_sets[event_index]
    atoms = [a for a in ws.atoms_of_front(s, fid) if a in survivors]
    interval = ws.interval_of(atoms)
    ks = sorted(ws.cell[a] for a in atoms)
    if ks != list(range(ks[0], ks[0] + len(ks))):
        raise ConsistencyError("meeting interval has non-contiguous states")
    return interval


def _entropic_slope(ws, flux, interval, atom):
    lo = grid_index(interval.state_lo, flux.epsilon)
    hi = grid_index(interval.state_hi, flux.epsilon)
    return _cell_slopes(flux, lo, hi, interval.sign)[ws.cell[atom]]


def pair_weight(ws: WaveSystem, t_bar, c, c_prime, K, flux: GridFlux) -> PairWeightRecord:
    """Classify one wave pair at time t_bar and compute its weight."""
    ws._require_traced()
    K = _k_value(K)
    a, b = _atom_id(ws, c), _atom_id(ws, c_prime)
    if a == b:
        raise InputError("need two distinct waves")
    if a > b:
        a, b = b, a
    t_bar = Fraction(t_bar)
    s = ws.timeline.slab_index_at(t_bar, side="pre")
    for atom in (a, b):
        if not ws.alive_in_slab(atom, s):
            raise InputError("wave not live at the query time")
    return _pair_weight_in_slab(ws, s, a, b, K, flux, with_intervals=True)


def _pair_weight_in_slab(ws, s, a, b, K, flux, with_intervals=False):
    sign = ws.sign[a]
    live = ws.live_atoms(s)
    i_a = bisect_left(live, a)
    i_b = bisect_left(live, b)
    if any(ws.sign[live[i]] != sign for i in range(i_a, i_b + 1)):
        return PairWeightRecord(a, b, MIXED_SIGN, K, Fraction(0), Fraction(0))
    if ws.fid_of(a, s) == ws.fid_of(b, s):
        return PairWeightRecord(a, b, SAME_POSITION, Fraction(0), Fraction(0), Fraction(0))
    e = first_common_event(ws, a, b, after_slab=s)
    if e is None:
        return PairWeightRecord(a, b, NEVER_INTERACT, Fraction(0), Fraction(0), Fraction(0))
    ev = ws.timeline.events[e]
    d = abs(ev.c - ev.a)
    j_left = _j_interval(ws, s, ws.fid_of(a, s), e)
    j_right = _j_interval(ws, s, ws.fid_of(b, s), e)
    pi = _entropic_slope(ws, flux, j_left, a) - _entropic_slope(ws, flux, j_right, b)
    if pi < 0:
        pi = Fraction(0)
    q = pi / d
    if not 0 <= q <= K:
        raise ConsistencyError(f"weight {q} outside [0, {K}] for atoms ({a}, {b})")
    return PairWeightRecord(
        a, b, GENERIC, q, pi, d,
        j_left=j_left if with_intervals else None,
        j_right=j_right if with_intervals else None,
        meeting=(ev.t, ev.x),
    )


class _SlabPotential:
    """Per-slab Q evaluation with memoized meeting intervals and slopes."""

    def __init__(self, ws: WaveSystem, flux: GridFlux, K: Fraction):
        self.ws = ws
        self.flux = flux
        self.K = K
        self._slope_memo = {}
        self.max_weight = Fraction(0)

    def _slopes_for(self, s, fid, e):
        key = (s, fid, e)
        if key not in self._slope_memo:
            ws = self.ws
            interval = _j_interval(ws, s, fid, e)
            lo = grid_index(interval.state_lo, self.flux.epsilon)
            hi = grid_index(interval.state_hi, self.flux.epsilon)
            self._slope_memo[key] = _cell_slopes(self.flux, lo, hi, interval.sign)
        return self._slope_memo[key]

    def _event_d(self, e: int) -> Fraction:
        ev = self.ws.timeline.events[e]
        return abs(ev.c - ev.a)

    def q_of_slab(self, s: int) -> Fraction:
        ws = self.ws
        runs = ws.runs(s)
        flips = [0]
        for (_, left), (_, right) in zip(runs, runs[1:]):
            changed = ws.sign[left[0]] != ws.sign[right[0]]
            flips.append(flips[-1] + (1 if changed else 0))
        eps2 = ws.epsilon * ws.epsilon
        total = Fraction(0)
        for i, (fid_i, atoms_i) in enumerate(runs):
            for j in range(i + 1, len(runs)):
                fid_j, atoms_j = runs[j]
                if flips[j] != flips[i]:
                    total += self.K * eps2 * len(atoms_i) * len(atoms_j)
                    if self.K > self.max_weight:
                        self.max_weight = self.K
                    continue
                sums = {}  # event index -> accumulated positive slope gaps
                for a in atoms_i:
                    cached = None
                    for b in atoms_j:
                        e = first_common_event(ws, a, b, after_slab=s)
                        if e is None:
                            continue
                        if cached is None or cached[0] != e:
                            cached = (e, self._slopes_for(s, fid_i, e))
                        gap = cached[1][ws.cell[a]] - self._slopes_for(s, fid_j, e)[ws.cell[b]]
                        if gap > 0:
                            d = self._event_d(e)
                            if gap > self.K * d:
                                raise ConsistencyError(
                                    f"weight above K for atoms ({a}, {b}) in slab {s}"
                                )
                            if gap > self.max_weight * d:
                                self.max_weight = gap / d
                            sums[e] = sums.get(e, Fraction(0)) + gap
                for e, acc in sums.items():
                    total += acc * eps2 / self._event_d(e)
        return total


def quadratic_potential(ws: WaveSystem, t_bar, side="post", K=None, flux=None,
                        with_records=False):
    """Q at time t_bar (the constant value of the surrounding open slab).

    ``side`` picks the one-sided limit at event instants.  Returns the exact
    value, plus the per-pair records when requested.
    """
    ws._require_traced()
    flux = flux if flux is not None else ws.timeline.flux
    K = K if K is not None else curvature_constant(flux).K
    s = ws.timeline.slab_index_at(Fraction(t_bar), side=side)
    value = _SlabPotential(ws, flux, K).q_of_slab(s)
    if not with_records:
        return value
    records = []
    live = ws.live_atoms(s)
    for i, a in enumerate(live):
        for b in live[i + 1:]:
            records.append(_pair_weight_in_slab(ws, s, a, b, K, flux))
    check = sum((r.q for r in records), Fraction(0)) * ws.epsilon * ws.epsilon
    if check != value:
        raise ConsistencyError("pair records disagree with the slab potential")
    return value, records


def upsilon(q_value, tv_now, tv0, K):
    """The combined potentials: K*TV0*TV(t) plus Q, and plus 2Q."""
    base = K * tv0 * tv_now
    return base + q_value, base + 2 * q_value


def bianchini_cubic(ws: WaveSystem, t_bar, side="post") -> Fraction:
    """Cubic speed-spread diagnostic: sum over pairs of |speed gap| dw dw'."""
    ws._require_traced()
    s = ws.timeline.slab_index_at(Fraction(t_bar), side=side)
    return _bianchini_of_slab(ws, s)


def _bianchini_of_slab(ws: WaveSystem, s: int) -> Fraction:
    runs = ws.runs(s)
    eps = ws.epsilon
    total = Fraction(0)
    for i, (fid_i, atoms_i) in enumerate(runs):
        speed_i = ws.timeline.fronts_by_id[fid_i].speed
        for fid_j, atoms_j in runs[i + 1:]:
            speed_j = ws.timeline.fronts_by_id[fid_j].speed
            total += abs(speed_i - speed_j) * (len(atoms_i) * eps) * (len(atoms_j) * eps)
    return total


def maximal_noncontact_interval(flux: GridFlux, a, b, d_j) -> Fraction:
    """First grid point at or beyond b where the hull of the flux on [a, d_j]
    touches the flux samples; d_j itself if the hull leaves the samples
    strictly above everywhere before it."""
    a, b, d_j = Fraction(a), Fraction(b), Fraction(d_j)
    if not a < b <= d_j:
        raise InputError("need a < b <= d_j")
    hull = convex_envelope(flux, a, d_j)
    k_b = grid_index(b, flux.epsilon)
    k_hi = grid_index(d_j, flux.epsilon)
    for k in range(k_b, k_hi + 1):
        u = k * flux.epsilon
        if hull.value_at(u) == flux.value_at_index(flux.index_of(u)):
            return u
    raise ConsistencyError("hull does not touch its own right endpoint")


# -- run-level verification ---------------------------------------------------------


@dataclass(frozen=True)
class SlabRecord:
    index: int
    t_lo: Fraction
    t_hi: object
    Q: Fraction
    TV: Fraction
    upsilon_paper: Fraction
    upsilon_strict: Fraction
    bianchini: Fraction


@dataclass(frozen=True)
class EventRecord:
    index: int
    t: Fraction
    x: Fraction
    kind: str
    a: Fraction
    b: Fraction
    c: Fraction
    delta_sigma: Fraction
    Q_minus: Fraction
    Q_plus: Fraction
    TV_minus: Fraction
    TV_plus: Fraction
    composite: bool
    verdicts: dict


@dataclass(frozen=True)
class RestartCheck:
    slab: int
    t: Fraction
    Q_original: Fraction
    Q_restart: Fraction
    equal: bool


HARD_EVENT_VERDICTS = (
    "q_monotone",
    "half_delta_sigma_le_q_drop",
    "cancellation_curvature_bound",
    "cancellation_tv_bound",
    "delta_sigma_le_upsilon_strict_drop",
    "upsilon_paper_monotone",
    "upsilon_strict_monotone",
)


@dataclass
class PotentialSeries:
    K: Fraction
    tv0: Fraction
    epsilon: Fraction
    slabs: list = field(default_factory=list)
    events: list = field(default_factory=list)
    restart_checks: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    slab_bound_ok: bool = True
    max_weight: Fraction = Fraction(0)

    def hard_failures(self):
        out = []
        if not self.slab_bound_ok:
            out.append("slab_q_bound")
        for ev in self.events:
            for name in HARD_EVENT_VERDICTS:
                if name in ev.verdicts and not ev.verdicts[name]:
                    out.append(f"event{ev.index}:{name}")
        for rc in self.restart_checks:
            if not rc.equal:
                out.append(f"restart@slab{rc.slab}")
        return out

    @property
    def all_pass(self) -> bool:
        return not self.hard_failures()


def _restart_probe_times(tl: Timeline, count: int):
    """Deterministic spread of slab midpoints (the last slab probes t_lo + 1)."""
    if count <= 0:
        return []
    n = len(tl.slabs)
    if n == 1:
        picks = [0]
    else:
        step = max(count - 1, 1)
        picks = sorted({(i * (n - 1)) // step for i in range(count)})
    out = []
    for s in picks:
        slab = tl.slabs[s]
        if slab.t_hi is None:
            out.append((s, slab.t_lo + 1))
        elif slab.t_hi > slab.t_lo:
            out.append((s, (slab.t_lo + slab.t_hi) / 2))
        # zero-length slabs (simultaneous events) have no interior to probe
    return out


def run_pipeline(profile, flux):
    """Evolve, trace and validate one profile; shared by runs and restarts."""
    tl = evolve(profile, flux)
    ws = advance_tracing(build_initial_waves(profile, flux.epsilon), tl)
    return tl, ws


def verify_run(tl: Timeline, ws: WaveSystem, flux: GridFlux,
               restart_checks: int = 0, K=None) -> PotentialSeries:
    """Evaluate every potential on every slab and check every inequality.

    Hard verdicts (exact, expected to hold always): Q non-increasing; at
    same-sign events half the speed change is dominated by the Q drop; at
    cancellations the speed change is dominated by K|c-a||c-b| and by
    K*TV0*(TV drop); the doubled-Q functional dominates the full speed
    change at every event and never increases; Q <= K*TV^2 on every slab.

    Flags (recorded, allowed to fail): the single-Q drop bound and the
    constant-1 initial bound, which the doubled-Q forms repair.
    """
    K = curvature_constant(flux).K if K is None else _k_value(K)
    tv0 = tl.initial_profile.total_variation()
    series = PotentialSeries(K=K, tv0=tv0, epsilon=flux.epsilon)
    engine = _SlabPotential(ws, flux, K)

    q_by_slab = []
    for s, slab in enumerate(tl.slabs):
        q_val = engine.q_of_slab(s)
        tv = tl.slab_tv(s)
        if len(ws.live_atoms(s)) * ws.epsilon != tv:
            raise ConsistencyError("wave mass does not match front variation")
        u_paper, u_strict = upsilon(q_val, tv, tv0, K)
        if q_val > K * tv * tv:
            series.slab_bound_ok = False
        q_by_slab.append((q_val, tv, u_paper, u_strict))
        series.slabs.append(
            SlabRecord(s, slab.t_lo, slab.t_hi, q_val, tv, u_paper, u_strict,
                       _bianchini_of_slab(ws, s))
        )
    series.max_weight = engine.max_weight

    upsilon_paper_drop_failures = []
    for ev in tl.events:
        q_minus, tv_minus, up_minus, us_minus = q_by_slab[ev.index]
        q_plus, tv_plus, up_plus, us_plus = q_by_slab[ev.index + 1]
        dsig = delta_sigma(ev, flux)
        drop = q_minus - q_plus
        verdicts = {
            "q_monotone": drop >= 0,
            "delta_sigma_le_upsilon_strict_drop": dsig <= us_minus - us_plus,
            "delta_sigma_le_upsilon_paper_drop": dsig <= up_minus - up_plus,
            "upsilon_paper_monotone": up_plus <= up_minus,
            "upsilon_strict_monotone": us_plus <= us_minus,
        }
        # the per-kind drop bounds are statements about one state triple; they
        # are attached only to binary events (composite events carry a summed
        # speed change and are covered by the combined-potential verdicts)
        if len(ev.incoming) == 2:
            if ev.kind == SAME_SIGN:
                verdicts["half_delta_sigma_le_q_drop"] = dsig / 2 <= drop
            else:
                verdicts["cancellation_curvature_bound"] = (
                    dsig <= K * abs(ev.c - ev.a) * abs(ev.c - ev.b)
                )
                verdicts["cancellation_tv_bound"] = (
                    dsig <= K * tv0 * (tv_minus - tv_plus)
                )
        if not verdicts["delta_sigma_le_upsilon_paper_drop"]:
            upsilon_paper_drop_failures.append(ev.index)
        series.events.append(
            EventRecord(
                ev.index, ev.t, ev.x, ev.kind, ev.a, ev.b, ev.c,
                dsig, q_minus, q_plus, tv_minus, tv_plus,
                len(ev.incoming) > 2, verdicts,
            )
        )

    q0, tv_at0 = q_by_slab[0][0], q_by_slab[0][1]
    up0, _ = upsilon(q0, tv_at0, tv0, K)
    series.flags = {
        "upsilon0_le_k_tv0_sq": up0 <= K * tv0 * tv0,
        "upsilon0_le_2k_tv0_sq": up0 <= 2 * K * tv0 * tv0,
        "upsilon_paper_drop_failures": upsilon_paper_drop_failures,
    }
    if not series.flags["upsilon0_le_2k_tv0_sq"]:
        raise ConsistencyError("doubled initial bound violated; this is a bug")

    for s, t_probe in _restart_probe_times(tl, restart_checks):
        q_here = q_by_slab[s][0]
        tl2, ws2 = run_pipeline(profile_at(tl, t_probe), flux)
        q_restart = _SlabPotential(ws2, flux, K).q_of_slab(0)
        series.restart_checks.append(
            RestartCheck(s, t_probe, q_here, q_restart, q_here == q_restart)
        )
    return series


# -- extra structural checks ---------------------------------------------------------


def cancellation_weight_stability(tl: Timeline, ws: WaveSystem, flux: GridFlux,
                                  K=None) -> list:
    """Across each cancellation: cross pairs (one wave outside the surviving
    jump, one inside) keep their weight when their classification persists,
    and pairs fully inside come out with zero weight.  Returns violations."""
    if K is None:
        K = curvature_constant(flux).K
    bad = []
    for ev in tl.events:
        if ev.kind != CANCELLATION:
            continue
        s_pre, s_post = ev.index, ev.index + 1
        survivors = set(ws.survivors_by_event[ev.index])
        live_post = ws.live_atoms(s_post)
        for i, a in enumerate(live_post):
            for b in live_post[i + 1:]:
                a_in, b_in = a in survivors, b in survivors
                if not (a_in or b_in):
                    continue
                post = _pair_weight_in_slab(ws, s_post, a, b, K, flux)
                if a_in and b_in:
                    if post.q != 0:
                        bad.append((ev.index, a, b, "inside pair kept weight"))
                    continue
                pre = _pair_weight_in_slab(ws, s_pre, a, b, K, flux)
                if pre.classification == post.classification and pre.q != post.q:
                    bad.append((ev.index, a, b, "cross pair weight changed"))
    return bad


def fundamental_property_violations(ws: WaveSystem, flux: GridFlux, K=None) -> list:
    """For wave triples w <= w' <= w'': equal right meeting intervals for
    (w, w') and (w, w'') force equal left meeting intervals.  Exhaustive
    over live atom triples of every slab; returns violations."""
    if K is None:
        K = curvature_constant(ws.timeline.flux).K
    bad = []
    for s in range(len(ws.timeline.slabs)):
        live = ws.live_atoms(s)
        # precompute the meeting intervals of every generic pair once
        j_sets = {}
        for i, a in enumerate(live):
            for b in live[i + 1:]:
                rec = _pair_weight_in_slab(ws, s, a, b, K, flux, with_intervals=True)
                if rec.classification == GENERIC:
                    j_sets[(a, b)] = (rec.j_left.atoms, rec.j_right.atoms)
        for i, a in enumerate(live):
            for j in range(i + 1, len(live)):
                ab = j_sets.get((a, live[j]))
                if ab is None:
                    continue
                for k in range(j + 1, len(live)):
                    ac = j_sets.get((a, live[k]))
                    if ac is None:
                        continue
                    if ab[1] == ac[1] and ab[0] != ac[0]:
                        bad.append((s, a, live[j], live[k]))
    return bad
