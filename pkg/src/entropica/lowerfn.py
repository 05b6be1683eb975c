"""Lower-computable functions and certified lower integrals.

A lower-computable function is an enumeration of (ball, value) pairs with
f(x) = sup of the values whose balls contain x.  Its integral over an
enumerable open set is lower-computed by peeling the minimal level of the
finite step-function supremum: each round contributes (minimal level)
times a certified lower bound of the measure of (union of active balls)
intersected with the open set, then the minimal level is subtracted from
every active pair.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .measures import MeasureOracle
from .spaces import (CantorSpace, EnumerableOpenSet, IdealBall, IntervalRegion,
                     IntervalSpace, Membership, Point, PrefixRegion,
                     SpaceDescriptor, TorusRegion, TorusSpace, ball_membership,
                     distance)

# refinement depth caps keep cell counts manageable per space
_REFINEMENT_CAP = {"interval": 12, "cantor": 12, "circle": 9, "torus2": 6,
                   "torus3": 4}


class LowerComputableFunction:
    """Deterministic enumeration of (ideal ball, positive rational) pairs."""

    def __init__(self, space: SpaceDescriptor, pairs: Sequence[tuple[IdealBall, Fraction]]):
        self.space = space
        self.pairs = [(b, Fraction(r)) for b, r in pairs]
        if any(r <= 0 for _, r in self.pairs):
            raise ValueError("enumerated values must be positive")

    def pair(self, k: int) -> Optional[tuple[IdealBall, Fraction]]:
        return self.pairs[k] if k < len(self.pairs) else None

    def pairs_up_to(self, effort: int) -> list[tuple[IdealBall, Fraction]]:
        return self.pairs[:effort]

    @classmethod
    def zero(cls, space: SpaceDescriptor) -> "LowerComputableFunction":
        return cls(space, [])


def eval_lower(f: LowerComputableFunction, x: Point, effort: int) -> Fraction:
    """Best certified lower bound on f(x) from the first `effort` pairs.

    Membership of each candidate ball is probed at increasing precision up
    to `effort` and the first decisive answer wins, so results never
    decrease as the effort grows.
    """
    best = Fraction(0)
    for ball, value in f.pairs_up_to(effort):
        if value <= best:
            continue
        d = distance(f.space, x, Point(f.space, lambda _: ball.center))
        for p in range(2, max(3, effort + 1)):
            m = _membership_at(f.space, d, ball, p)
            if m == Membership.INSIDE:
                best = value
                break
            if m == Membership.OUTSIDE:
                break
    return best


def _membership_at(space, dist_real, ball, p) -> Membership:
    qd = dist_real.approx(p).as_fraction()
    err = Fraction(1, 1 << p)
    r = ball.radius
    if isinstance(r, Fraction):
        r_lo = r_hi = r
    else:
        qr = r.approx(p).as_fraction()
        r_lo, r_hi = qr - err, qr + err
    if qd + err < r_lo:
        return Membership.INSIDE
    if qd - err > r_hi:
        return Membership.OUTSIDE
    return Membership.UNKNOWN


# ---------------------------------------------------------------------------
# intersection lower bounds via dyadic refinement

def _region_of_balls(space: SpaceDescriptor, balls: Sequence[IdealBall]):
    if isinstance(space, IntervalSpace):
        return IntervalRegion.union([space.ball_region(b) for b in balls])
    if isinstance(space, CantorSpace):
        return PrefixRegion([space.ball_cylinder(b) for b in balls])
    if isinstance(space, TorusSpace):
        return TorusRegion.union([space.ball_region(b) for b in balls])
    raise NotImplementedError(f"no region arithmetic for {space.name}")


def _region_covers_cell(space: SpaceDescriptor, region, cell: IdealBall) -> bool:
    if isinstance(space, IntervalSpace):
        c = space.ideal_point(cell.center)
        r = cell.radius
        return region.contains_interval(max(Fraction(0), c - r),
                                        min(Fraction(1), c + r))
    if isinstance(space, CantorSpace):
        return region.covers_cylinder(space.ball_cylinder(cell))
    if isinstance(space, TorusSpace):
        c = space.ideal_point(cell.center)
        r = cell.radius
        box = tuple((ci - r, ci + r) for ci in c)
        # refinement cells never wrap: centers are odd dyadics, radius half side
        return region.covers_box(box)
    raise NotImplementedError


def _intersection_lower(balls: Sequence[IdealBall], U: EnumerableOpenSet,
                        mu: MeasureOracle, effort: int) -> Fraction:
    """Certified lower bound of mu((union of balls) wedge U)."""
    if U.is_whole_space:
        return mu.union_lower(balls, effort)
    space = mu.space
    level = min(max(1, effort), _REFINEMENT_CAP.get(space.name, 4))
    v_region = _region_of_balls(space, balls)
    u_balls = U.balls_up_to(max(4, effort))
    if not u_balls:
        return Fraction(0)
    u_region = _region_of_balls(space, u_balls)
    cells = [c for c in space.refinement_cells(level)
             if _region_covers_cell(space, v_region, c)
             and _region_covers_cell(space, u_region, c)]
    if not cells:
        return Fraction(0)
    return mu.union_lower(cells, effort)


def integrate_open(f: LowerComputableFunction, U: EnumerableOpenSet,
                   mu: MeasureOracle, effort: int) -> Fraction:
    """Certified lower bound of the integral of f over U, nondecreasing in
    effort.  Half the budget goes to pair enumeration, half to measure
    bounds."""
    pair_budget = max(1, effort // 2)
    measure_effort = max(1, effort - pair_budget)
    active = [(ball, level) for ball, level in f.pairs_up_to(pair_budget)]
    total = Fraction(0)
    while active:
        qmin = min(level for _, level in active)
        balls = [ball for ball, _ in active]
        total += qmin * _intersection_lower(balls, U, mu, measure_effort)
        active = [(ball, level - qmin) for ball, level in active
                  if level - qmin > 0]
    return total


def integrate(f: LowerComputableFunction, mu: MeasureOracle, effort: int) -> Fraction:
    """Lower bound of the integral over the whole space."""
    return integrate_open(f, EnumerableOpenSet.whole_space(mu.space), mu, effort)
