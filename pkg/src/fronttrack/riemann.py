"""Entropic Riemann solver for the grid-sampled flux.

A jump (u_left, u_right) decomposes into one front per affine piece of the
convex (increasing jump) or concave (decreasing jump) envelope of the flux on
the state interval.  Fronts come out ordered left to right by strictly
increasing speed, with states chaining from u_left to u_right.
"""

from dataclasses import dataclass, replace
from fractions import Fraction

from .envelope import GridFlux, envelope
from .errors import ConsistencyError, InputError


@dataclass(frozen=True)
class Front:
    """One admissible wavefront: a jump travelling at its chord speed."""

    left: Fraction
    right: Fraction
    speed: Fraction
    birth_time: Fraction
    birth_x: Fraction
    fid: int = -1

    def __post_init__(self):
        if self.left == self.right:
            raise InputError("a front must carry a nonzero jump")

    @property
    def sign(self) -> int:
        return 1 if self.right > self.left else -1

    @property
    def strength(self) -> Fraction:
        return abs(self.right - self.left)

    @property
    def u_lo(self) -> Fraction:
        return min(self.left, self.right)

    @property
    def u_hi(self) -> Fraction:
        return max(self.left, self.right)

    def position_at(self, t: Fraction) -> Fraction:
        return self.birth_x + self.speed * (t - self.birth_time)

    def with_fid(self, fid: int) -> "Front":
        return replace(self, fid=fid)


def solve_riemann(u_left, u_right, flux: GridFlux, t0=Fraction(0), x0=Fraction(0)):
    """Decompose the jump (u_left, u_right) at (t0, x0) into admissible fronts.

    Returns [] for a null jump.  Fronts are in bijection with the envelope
    pieces on [min, max] of the two states, traversed from the u_left end.
    """
    u_left, u_right = Fraction(u_left), Fraction(u_right)
    if u_left == u_right:
        return []
    sign = 1 if u_right > u_left else -1
    env = envelope(flux, min(u_left, u_right), max(u_left, u_right), sign)
    pieces = list(env.pieces())
    if sign < 0:
        # decreasing jump: traverse the concave envelope from the top state
        pieces = [(x1, x0_, s) for x0_, x1, s in reversed(pieces)]
    fronts = [
        Front(left=a, right=b, speed=s, birth_time=Fraction(t0), birth_x=Fraction(x0))
        for a, b, s in pieces
    ]
    speeds = [fr.speed for fr in fronts]
    if any(s >= t for s, t in zip(speeds, speeds[1:])):
        raise ConsistencyError("Riemann fan speeds must strictly increase")
    if fronts[0].left != u_left or fronts[-1].right != u_right:
        raise ConsistencyError("Riemann fan states do not chain to the data")
    return fronts


def is_admissible(front: Front, flux: GridFlux) -> bool:
    """True iff the envelope over the front's jump is the single chord at its speed."""
    env = envelope(flux, front.u_lo, front.u_hi, front.sign)
    pieces = list(env.pieces())
    return len(pieces) == 1 and pieces[0][2] == front.speed
