"""Envelope algebra: examples against an independent hull oracle, plus properties."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fronttrack.envelope import (
    CurvatureConstant,
    GridFlux,
    concave_envelope,
    convex_envelope,
    curvature_constant,
    rh_speed,
    sample_flux,
    slope_at,
)
from fronttrack.errors import DomainError, InputError

from oracles import hull_oracle_values

BURGERS = {"polynomial": ["0", "0", "1/2"]}
CUBIC = {"polynomial": ["0", "0", "0", "1"]}


def envelope_matches_oracle(flux, ka, kb):
    pts = [(flux.grid_u(k), flux.value_at_index(k)) for k in range(ka, kb + 1)]
    expected = hull_oracle_values(pts)
    env = convex_envelope(flux, flux.grid_u(ka), flux.grid_u(kb))
    for (x, _), want in zip(pts, expected):
        assert env.value_at(x) == want
    # hull vertices must be sample points where envelope touches the samples
    sample = dict(pts)
    for bp, val in zip(env.breakpoints, env.ordinates):
        assert sample[bp] == val


# -- sampling ----------------------------------------------------------------


def test_sample_burgers_unit_grid():
    f = sample_flux(BURGERS, "1", (-2, 2))
    assert f.values == (F(2), F(1, 2), F(0), F(1, 2), F(2))


def test_sample_cubic_half_grid():
    f = sample_flux(CUBIC, "1/2", (-2, 2))
    assert f.values == (F(-1), F(-1, 8), F(0), F(1, 8), F(1))


def test_sample_table_echoes():
    f = sample_flux({"table": {"-1": "3/7", "0": "0", "1": "2/5"}}, "1", (-1, 1))
    assert f.values == (F(3, 7), F(0), F(2, 5))


def test_sample_table_missing_point():
    with pytest.raises(InputError):
        sample_flux({"table": {"0": "0", "1": "1"}}, "1", (-1, 1))


def test_sample_degenerate_range():
    with pytest.raises(InputError):
        sample_flux(BURGERS, "1", (2, 2))
    with pytest.raises(InputError):
        sample_flux(BURGERS, "0", (-1, 1))


# -- envelopes ---------------------------------------------------------------


def test_convex_envelope_of_convex_flux_is_identity():
    f = sample_flux(BURGERS, "1", (-2, 2))
    env = convex_envelope(f, F(-1), F(1))
    assert env.breakpoints == (F(-1), F(0), F(1))
    assert env.ordinates == (F(1, 2), F(0), F(1, 2))


def test_convex_envelope_collinear_cubic_points():
    f = sample_flux(CUBIC, "1", (-1, 1))
    env = convex_envelope(f, F(-1), F(1))
    assert env.breakpoints == (F(-1), F(1))
    assert env.piece_slopes() == [F(1)]


def test_convex_envelope_cubic_quarter_grid():
    f = sample_flux(CUBIC, "1/4", (-4, 4))
    env = convex_envelope(f, F(-1), F(1))
    # chord from (-1,-1) to the tangency point (1/2, 1/8), then the samples
    assert env.breakpoints == (F(-1), F(1, 2), F(3, 4), F(1))
    assert env.piece_slopes() == [F(3, 4), F(19, 16), F(37, 16)]
    envelope_matches_oracle(f, -4, 4)


def test_concave_envelope_burgers_single_chord():
    f = sample_flux(BURGERS, "1", (-2, 2))
    env = concave_envelope(f, F(-1), F(1))
    assert env.breakpoints == (F(-1), F(1))
    assert env.ordinates == (F(1, 2), F(1, 2))
    assert env.piece_slopes() == [F(0)]


def test_concave_envelope_of_concave_input_is_identity():
    f = sample_flux({"polynomial": ["0", "0", "-1"]}, "1", (-2, 2))
    env = concave_envelope(f, F(-2), F(2))
    assert env.breakpoints == (F(-2), F(-1), F(0), F(1), F(2))


def test_envelope_on_two_point_interval_is_chord():
    f = sample_flux(CUBIC, "1", (-2, 2))
    for env_fn in (convex_envelope, concave_envelope):
        env = env_fn(f, F(1), F(2))
        assert env.breakpoints == (F(1), F(2))
        assert env.piece_slopes() == [F(7)]


def test_envelope_errors():
    f = sample_flux(BURGERS, "1", (-2, 2))
    with pytest.raises(InputError):
        convex_envelope(f, F(1), F(1))
    with pytest.raises(DomainError):
        convex_envelope(f, F(-3), F(1))
    with pytest.raises(InputError):
        convex_envelope(f, F(1, 3), F(1))  # off-grid endpoint


# -- slopes ------------------------------------------------------------------


def test_slope_at_interior_of_chord():
    f = sample_flux(CUBIC, "1", (-1, 1))
    env = convex_envelope(f, F(-1), F(1))
    assert slope_at(env, F(0), "left") == F(1)
    assert slope_at(env, F(0), "right") == F(1)


def test_slope_at_cubic_quarter_grid():
    f = sample_flux(CUBIC, "1/4", (-4, 4))
    env = convex_envelope(f, F(-1), F(1))
    assert slope_at(env, F(1, 4), "right") == F(3, 4)


def test_slope_at_breakpoint_one_sided():
    f = sample_flux(CUBIC, "1/4", (-4, 4))
    env = convex_envelope(f, F(-1), F(1))
    assert slope_at(env, F(1, 2), "left") == F(3, 4)
    assert slope_at(env, F(1, 2), "right") == F(19, 16)


def test_slope_at_domain_edges():
    f = sample_flux(BURGERS, "1", (-2, 2))
    env = convex_envelope(f, F(-1), F(1))
    assert slope_at(env, F(-1), "right") == F(-1, 2)
    with pytest.raises(DomainError):
        slope_at(env, F(-1), "left")
    with pytest.raises(DomainError):
        slope_at(env, F(2), "right")


# -- rh speed ----------------------------------------------------------------


def test_rh_speed_examples():
    f = sample_flux(BURGERS, "1", (-2, 2))
    assert rh_speed(f, F(0), F(1)) == F(1, 2)
    assert rh_speed(f, F(-1), F(1)) == F(0)
    g = sample_flux(CUBIC, "1", (-2, 2))
    assert rh_speed(g, F(-1), F(0)) == F(1)
    with pytest.raises(InputError):
        rh_speed(f, F(1), F(1))


# -- curvature ---------------------------------------------------------------


def test_curvature_burgers():
    f = sample_flux(BURGERS, "1", (-2, 2))
    assert curvature_constant(f).K == F(1)


def test_curvature_affine_flux():
    f = sample_flux({"polynomial": ["1", "2/3"]}, "1", (-3, 3))
    assert curvature_constant(f).K == F(0)


def test_curvature_cubic_windows():
    narrow = sample_flux(CUBIC, "1", (-1, 1))
    assert curvature_constant(narrow).K == F(0)
    wide = sample_flux(CUBIC, "1", (-2, 2))
    assert curvature_constant(wide).K == F(6)


def test_curvature_needs_three_points():
    f = sample_flux(BURGERS, "1", (0, 1))
    with pytest.raises(InputError):
        curvature_constant(f)


# -- property tests ----------------------------------------------------------

small_flux = st.builds(
    lambda eps_den, vals: GridFlux(
        F(1, eps_den), 0, len(vals) - 1, tuple(F(n, d) for n, d in vals)
    ),
    st.sampled_from([1, 2, 4]),
    st.lists(
        st.tuples(st.integers(-12, 12), st.integers(1, 4)), min_size=3, max_size=9
    ),
)


@settings(max_examples=120, deadline=None)
@given(small_flux, st.data())
def test_envelope_equals_hull_oracle(f, data):
    ka = data.draw(st.integers(f.k_min, f.k_max - 1))
    kb = data.draw(st.integers(ka + 1, f.k_max))
    envelope_matches_oracle(f, ka, kb)


@settings(max_examples=100, deadline=None)
@given(small_flux)
def test_envelope_minorant_and_endpoint_equality(f):
    a, b = f.grid_u(f.k_min), f.grid_u(f.k_max)
    env = convex_envelope(f, a, b)
    for k in range(f.k_min, f.k_max + 1):
        assert env.value_at(f.grid_u(k)) <= f.value_at_index(k)
    assert env.value_at(a) == f.value_at_index(f.k_min)
    assert env.value_at(b) == f.value_at_index(f.k_max)


@settings(max_examples=100, deadline=None)
@given(small_flux)
def test_envelope_idempotent(f):
    a, b = f.grid_u(f.k_min), f.grid_u(f.k_max)
    env = convex_envelope(f, a, b)
    # resample the envelope on the same grid and take the envelope again
    resampled = GridFlux(
        f.epsilon,
        f.k_min,
        f.k_max,
        tuple(env.value_at(f.grid_u(k)) for k in range(f.k_min, f.k_max + 1)),
    )
    again = convex_envelope(resampled, a, b)
    assert again == env


@settings(max_examples=100, deadline=None)
@given(small_flux)
def test_concave_convex_duality(f):
    a, b = f.grid_u(f.k_min), f.grid_u(f.k_max)
    neg = GridFlux(f.epsilon, f.k_min, f.k_max, tuple(-v for v in f.values))
    conc = concave_envelope(f, a, b)
    conv_of_neg = convex_envelope(neg, a, b)
    assert conc.breakpoints == conv_of_neg.breakpoints
    assert conc.ordinates == tuple(-y for y in conv_of_neg.ordinates)


@settings(max_examples=100, deadline=None)
@given(small_flux)
def test_envelope_slope_monotonicity(f):
    a, b = f.grid_u(f.k_min), f.grid_u(f.k_max)
    conv_slopes = convex_envelope(f, a, b).piece_slopes()
    assert all(s < t for s, t in zip(conv_slopes, conv_slopes[1:]))
    conc_slopes = concave_envelope(f, a, b).piece_slopes()
    assert all(s > t for s, t in zip(conc_slopes, conc_slopes[1:]))


@settings(max_examples=100, deadline=None)
@given(small_flux, st.data())
def test_rh_speed_between_extreme_envelope_slopes(f, data):
    ka = data.draw(st.integers(f.k_min, f.k_max - 1))
    kb = data.draw(st.integers(ka + 1, f.k_max))
    a, b = f.grid_u(ka), f.grid_u(kb)
    slopes = convex_envelope(f, a, b).piece_slopes()
    speed = rh_speed(f, a, b)
    assert min(slopes) <= speed <= max(slopes)


@settings(max_examples=100, deadline=None)
@given(small_flux, st.data())
def test_envelope_slope_gap_bounded_by_curvature(f, data):
    if f.k_max - f.k_min < 2:
        return
    K = curvature_constant(f).K
    ka = data.draw(st.integers(f.k_min, f.k_max - 1))
    kb = data.draw(st.integers(ka + 1, f.k_max))
    env = convex_envelope(f, f.grid_u(ka), f.grid_u(kb))
    ku = data.draw(st.integers(ka, kb - 1))
    kv = data.draw(st.integers(ku, kb - 1))
    mid_u = f.grid_u(ku) + f.epsilon / 2
    mid_v = f.grid_u(kv) + f.epsilon / 2
    su = env.slope_at(mid_u)
    sv = env.slope_at(mid_v)
    assert abs(sv - su) <= K * (mid_v - mid_u)


def test_curvature_dataclass_rejects_negative():
    with pytest.raises(InputError):
        CurvatureConstant(F(-1), (0, 1))
