"""Piecewise-linear flux algebra over exact rationals.

A smooth flux is sampled on the grid ``k*epsilon`` into a :class:`GridFlux`;
between grid points the flux is the affine interpolant.  Everything downstream
(Riemann fans, front speeds, interaction weights) reduces to convex/concave
envelopes of those samples on grid subintervals, their one-sided slopes, and
chord (Rankine-Hugoniot) slopes.  All arithmetic is exact, so envelope
identities and inequalities can be asserted with ``==`` rather than
tolerances.

The discrete curvature constant K (largest jump of consecutive cell slopes
divided by epsilon) plays the role a second-derivative bound plays for smooth
fluxes: for any envelope on any grid interval, slopes at two states differ by
at most K times the state gap.
"""

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, InputError
from .rationals import grid_index, parse_rational


@dataclass(frozen=True)
class GridFlux:
    """Flux samples F(k*epsilon) for k in [k_min, k_max], affine in between."""

    epsilon: Fraction
    k_min: int
    k_max: int
    values: tuple  # values[i] = F((k_min + i) * epsilon)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InputError("epsilon must be positive")
        if self.k_max <= self.k_min:
            raise InputError("flux window must contain at least two grid points")
        if len(self.values) != self.k_max - self.k_min + 1:
            raise InputError("flux sample count does not match the index range")

    # -- grid geometry -----------------------------------------------------

    def grid_u(self, k: int) -> Fraction:
        return k * self.epsilon

    def contains_index(self, k: int) -> bool:
        return self.k_min <= k <= self.k_max

    def contains_u(self, u: Fraction) -> bool:
        return self.grid_u(self.k_min) <= u <= self.grid_u(self.k_max)

    def index_of(self, u: Fraction) -> int:
        """Grid index of a grid-aligned state; errors if off-grid or outside."""
        k = grid_index(u, self.epsilon)
        if not self.contains_index(k):
            raise DomainError(f"state {u} outside the flux window")
        return k

    # -- evaluation ---------------------------------------------------------

    def value_at_index(self, k: int) -> Fraction:
        if not self.contains_index(k):
            raise DomainError(f"grid index {k} outside the flux window")
        return self.values[k - self.k_min]

    def value_at(self, u: Fraction) -> Fraction:
        """Affine interpolation of the samples at an arbitrary in-window u."""
        if not self.contains_u(u):
            raise DomainError(f"state {u} outside the flux window")
        q = Fraction(u) / self.epsilon
        k = min(q.__floor__(), self.k_max - 1)
        t = q - k
        lo = self.value_at_index(k)
        hi = self.value_at_index(k + 1)
        return lo + t * (hi - lo)

    def cell_slope(self, k: int) -> Fraction:
        """Slope of the affine piece on [k*eps, (k+1)*eps]."""
        return (self.value_at_index(k + 1) - self.value_at_index(k)) / self.epsilon


def sample_flux(flux_spec, epsilon, index_range) -> GridFlux:
    """Sample a flux spec on the grid.

    ``flux_spec`` is either ``{"polynomial": [c0, c1, ...]}`` (rational
    coefficients, exact Horner evaluation at each grid point) or
    ``{"table": {k: value, ...}}`` keyed by grid index.  A bare list is read
    as polynomial coefficients.
    """
    eps = parse_rational(epsilon)
    if eps <= 0:
        raise InputError("epsilon must be positive")
    k_min, k_max = int(index_range[0]), int(index_range[1])
    if k_max <= k_min:
        raise InputError("index range must contain at least two grid points")

    if isinstance(flux_spec, (list, tuple)):
        flux_spec = {"polynomial": list(flux_spec)}
    if not isinstance(flux_spec, dict) or len(flux_spec) != 1:
        raise InputError("flux spec must be {'polynomial': [...]} or {'table': {...}}")

    if "polynomial" in flux_spec:
        coeffs = [parse_rational(c) for c in flux_spec["polynomial"]]
        values = []
        for k in range(k_min, k_max + 1):
            u = k * eps
            acc = Fraction(0)
            for c in reversed(coeffs):
                acc = acc * u + c
            values.append(acc)
    elif "table" in flux_spec:
        table = {int(k): parse_rational(v) for k, v in flux_spec["table"].items()}
        missing = [k for k in range(k_min, k_max + 1) if k not in table]
        if missing:
            raise InputError(f"flux table is missing grid indices {missing}")
        values = [table[k] for k in range(k_min, k_max + 1)]
    else:
        raise InputError("flux spec must be {'polynomial': [...]} or {'table': {...}}")

    return GridFlux(eps, k_min, k_max, tuple(values))


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Continuous piecewise-linear function given by its breakpoints."""

    breakpoints: tuple  # strictly increasing Fractions
    ordinates: tuple

    def __post_init__(self):
        if len(self.breakpoints) < 2 or len(self.breakpoints) != len(self.ordinates):
            raise InputError("need matching breakpoints/ordinates, at least two")
        for a, b in zip(self.breakpoints, self.breakpoints[1:]):
            if a >= b:
                raise InputError("breakpoints must strictly increase")

    @property
    def domain(self):
        return self.breakpoints[0], self.breakpoints[-1]

    def pieces(self):
        """Yield (x_lo, x_hi, slope) for each affine piece."""
        for i in range(len(self.breakpoints) - 1):
            x0, x1 = self.breakpoints[i], self.breakpoints[i + 1]
            s = (self.ordinates[i + 1] - self.ordinates[i]) / (x1 - x0)
            yield x0, x1, s

    def piece_slopes(self):
        return [s for _, _, s in self.pieces()]

    def _piece_slope(self, i: int) -> Fraction:
        return (self.ordinates[i + 1] - self.ordinates[i]) / (
            self.breakpoints[i + 1] - self.breakpoints[i]
        )

    def value_at(self, u: Fraction) -> Fraction:
        lo, hi = self.domain
        if not lo <= u <= hi:
            raise DomainError(f"{u} outside [{lo}, {hi}]")
        i = min(bisect_right(self.breakpoints, u) - 1, len(self.breakpoints) - 2)
        return self.ordinates[i] + self._piece_slope(i) * (u - self.breakpoints[i])

    def slope_at(self, u: Fraction, side: str = "right") -> Fraction:
        """One-sided slope at u; at domain endpoints only the inward side exists."""
        if side not in ("left", "right"):
            raise InputError("side must be 'left' or 'right'")
        lo, hi = self.domain
        if not lo <= u <= hi:
            raise DomainError(f"{u} outside [{lo}, {hi}]")
        if u == lo and side == "left":
            raise DomainError("no left slope at the left endpoint")
        if u == hi and side == "right":
            raise DomainError("no right slope at the right endpoint")
        if side == "right":
            i = min(bisect_right(self.breakpoints, u) - 1, len(self.breakpoints) - 2)
        else:
            i = max(bisect_left(self.breakpoints, u) - 1, 0)
        return self._piece_slope(i)

def slope_at(g: PiecewiseLinearFn, u: Fraction, side: str = "right") -> Fraction:
    return g.slope_at(u, side)


def _lower_hull(points):
    """Lower convex hull of x-sorted points; collinear interior points dropped."""
    hull = []
    for p in points:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # keep only strict right turns: cross <= 0 means (x1,y1) is on or
            # above the chord from (x0,y0) to p, so it is not a hull vertex
            if (x1 - x0) * (p[1] - y0) - (p[0] - x0) * (y1 - y0) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


@lru_cache(maxsize=None)
def _convex_by_index(f: GridFlux, ka: int, kb: int) -> PiecewiseLinearFn:
    pts = [(f.grid_u(k), f.value_at_index(k)) for k in range(ka, kb + 1)]
    hull = _lower_hull(pts)
    return PiecewiseLinearFn(tuple(x for x, _ in hull), tuple(y for _, y in hull))


@lru_cache(maxsize=None)
def _concave_by_index(f: GridFlux, ka: int, kb: int) -> PiecewiseLinearFn:
    pts = [(f.grid_u(k), -f.value_at_index(k)) for k in range(ka, kb + 1)]
    hull = _lower_hull(pts)
    return PiecewiseLinearFn(tuple(x for x, _ in hull), tuple(-y for _, y in hull))


def _index_interval(f: GridFlux, a, b):
    a, b = Fraction(a), Fraction(b)
    if a >= b:
        raise InputError(f"need a < b, got [{a}, {b}]")
    return f.index_of(a), f.index_of(b)


def convex_envelope(f: GridFlux, a, b) -> PiecewiseLinearFn:
    """Largest convex minorant of the samples on the grid interval [a, b]."""
    ka, kb = _index_interval(f, a, b)
    return _convex_by_index(f, ka, kb)


def concave_envelope(f: GridFlux, a, b) -> PiecewiseLinearFn:
    """Smallest concave majorant; equals -convex_envelope(-f) exactly."""
    ka, kb = _index_interval(f, a, b)
    return _concave_by_index(f, ka, kb)


def envelope(f: GridFlux, a, b, sign: int) -> PiecewiseLinearFn:
    """Convex envelope for positive jumps, concave for negative ones."""
    return convex_envelope(f, a, b) if sign > 0 else concave_envelope(f, a, b)


def rh_speed(f: GridFlux, a: Fraction, b: Fraction) -> Fraction:
    """Chord slope (F(b) - F(a)) / (b - a): the jump's propagation speed."""
    a, b = Fraction(a), Fraction(b)
    if a == b:
        raise InputError("rh_speed needs two distinct states")
    fa = f.value_at_index(f.index_of(a))
    fb = f.value_at_index(f.index_of(b))
    return (fb - fa) / (b - a)


@dataclass(frozen=True)
class CurvatureConstant:
    """Discrete curvature bound of the sampled flux over its whole window."""

    K: Fraction
    window: tuple  # (k_min, k_max) the constant was taken over

    def __post_init__(self):
        if self.K < 0:
            raise InputError("curvature constant cannot be negative")


def curvature_constant(f: GridFlux) -> CurvatureConstant:
    """max_k |cell_slope(k) - cell_slope(k-1)| / epsilon, zero iff affine."""
    if f.k_max - f.k_min < 2:
        raise InputError("need at least three grid points for a curvature bound")
    best = Fraction(0)
    prev = f.cell_slope(f.k_min)
    for k in range(f.k_min + 1, f.k_max):
        cur = f.cell_slope(k)
        jump = abs(cur - prev) / f.epsilon
        if jump > best:
            best = jump
        prev = cur
    return CurvatureConstant(best, (f.k_min, f.k_max))
