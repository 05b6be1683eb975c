"""Computable metric spaces: ideal-point enumerations with computable
distances, ideal balls, points as fast Cauchy sequences, and enumerable
open sets.

Built-in spaces: Cantor space, the unit interval, flat tori (circle,
torus2, torus3) under the max metric, and the nonnegative reals.  The
built-ins expose exact rational geometry (region arithmetic, refinement
cells) on top of the approximate interface, which is what makes measure
bounds and basis construction certified rather than heuristic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .dyadic import DyadicRational
from .errors import UnknownSpaceError, UnsupportedError
from .reals import ComputableReal


class Membership(enum.Enum):
    INSIDE = 1
    OUTSIDE = -1
    UNKNOWN = 0


Radius = Union[Fraction, ComputableReal]


@dataclass(frozen=True)
class IdealBall:
    """Open ball around the ideal point with the given index."""
    center: int
    radius: Radius

    def radius_fraction(self) -> Optional[Fraction]:
        return self.radius if isinstance(self.radius, Fraction) else None


# ---------------------------------------------------------------------------
# integer pairing for product enumerations

def pair(a: int, b: int) -> int:
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(i: int) -> tuple[int, int]:
    import math
    s = (math.isqrt(8 * i + 1) - 1) // 2
    if (s + 1) * (s + 2) // 2 <= i:
        s += 1
    b = i - s * (s + 1) // 2
    return s - b, b


def _dyadic_unit_datum(i: int, include_one: bool) -> Fraction:
    """Deterministic enumeration of dyadics: 0 (, 1), then odd k/2^L by level."""
    specials = [Fraction(0), Fraction(1)] if include_one else [Fraction(0)]
    if i < len(specials):
        return specials[i]
    i -= len(specials)
    level = 1
    while i >= 1 << (level - 1):
        i -= 1 << (level - 1)
        level += 1
    return Fraction(2 * i + 1, 1 << level)


def _dyadic_unit_index(x: Fraction, include_one: bool) -> int:
    den = x.denominator
    if den & (den - 1):
        raise ValueError(f"{x} is not dyadic")
    base = 2 if include_one else 1
    if x == 0:
        return 0
    if x == 1:
        if include_one:
            return 1
        raise ValueError("1 is not an ideal point of the circle")
    level = den.bit_length() - 1
    # x = (2k+1)/2^level with level >= 1
    k = (x.numerator - 1) // 2
    return base + ((1 << (level - 1)) - 1) + k


def _circle_distance(a: Fraction, b: Fraction) -> Fraction:
    d = abs(a - b)
    d -= d.__floor__()
    return min(d, 1 - d)


# ---------------------------------------------------------------------------
# Space descriptors

class SpaceDescriptor:
    """A computable metric space: ideal-point enumeration plus distance oracle."""

    name: str
    diameter: Optional[Fraction]  # None when unbounded

    def ideal_point(self, i: int):
        raise NotImplementedError

    def ideal_distance_exact(self, i: int, j: int) -> Fraction:
        """Exact rational distance between ideal points (all built-ins)."""
        raise NotImplementedError

    def ideal_distance(self, i: int, j: int) -> ComputableReal:
        return ComputableReal.from_fraction(self.ideal_distance_exact(i, j))

    def index_of_datum(self, datum) -> int:
        raise NotImplementedError

    def datum_distance(self, a, b) -> Fraction:
        """Exact distance between explicit data (not necessarily enumerated)."""
        raise NotImplementedError

    def point(self, datum) -> "Point":
        """The exact point with the given datum."""
        return Point(self, exact_datum=datum)

    def find_ideal_within(self, datum, m: int) -> int:
        """Index of an ideal point within 2^-m of datum (density witness)."""
        raise NotImplementedError

    def whole_space_ball(self) -> IdealBall:
        raise UnsupportedError(f"{self.name} has no bounding ball")

    # region capability (overridden by built-ins that support it)

    def ball_region(self, ball: IdealBall):
        raise UnsupportedError(f"{self.name} does not expose exact regions")

    def refinement_cells(self, level: int) -> list[IdealBall]:
        raise UnsupportedError(f"{self.name} has no dyadic refinement")


class IntervalSpace(SpaceDescriptor):
    """[0, 1] with |x - y|; ideal points are the dyadic rationals."""

    name = "interval"
    diameter = Fraction(1)

    def ideal_point(self, i: int) -> Fraction:
        return _dyadic_unit_datum(i, include_one=True)

    def index_of_datum(self, datum: Fraction) -> int:
        return _dyadic_unit_index(Fraction(datum), include_one=True)

    def datum_distance(self, a: Fraction, b: Fraction) -> Fraction:
        return abs(Fraction(a) - Fraction(b))

    def ideal_distance_exact(self, i: int, j: int) -> Fraction:
        return self.datum_distance(self.ideal_point(i), self.ideal_point(j))

    def find_ideal_within(self, datum: Fraction, m: int) -> int:
        grid = 1 << (m + 1)
        k = max(0, min(grid, round(Fraction(datum) * grid)))
        return self.index_of_datum(Fraction(k, grid))

    def whole_space_ball(self) -> IdealBall:
        return IdealBall(self.index_of_datum(Fraction(1, 2)), Fraction(2))

    def ball_region(self, ball: IdealBall) -> "IntervalRegion":
        c = self.ideal_point(ball.center)
        r = ball.radius
        if not isinstance(r, Fraction):
            raise UnsupportedError("exact regions need rational radii")
        return IntervalRegion.from_interval(max(Fraction(0), c - r),
                                            min(Fraction(1), c + r))

    def refinement_cells(self, level: int) -> list[IdealBall]:
        half = Fraction(1, 1 << (level + 1))
        return [IdealBall(self.index_of_datum(Fraction(2 * j + 1, 1 << (level + 1))), half)
                for j in range(1 << level)]


class CantorSpace(SpaceDescriptor):
    """{0,1}^inf with d = 2^-(first differing index); ideal points are the
    eventually-zero sequences, given as finite bit strings."""

    name = "cantor"
    diameter = Fraction(1)

    def ideal_point(self, i: int) -> str:
        # strings ordered by length then lexicographically
        return bin(i + 1)[3:]

    def index_of_datum(self, datum: str) -> int:
        return int("1" + datum, 2) - 1

    def datum_distance(self, a: str, b: str) -> Fraction:
        n = max(len(a), len(b))
        a = a.ljust(n, "0")
        b = b.ljust(n, "0")
        for k in range(n):
            if a[k] != b[k]:
                return Fraction(1, 1 << k)
        return Fraction(0)

    def ideal_distance_exact(self, i: int, j: int) -> Fraction:
        return self.datum_distance(self.ideal_point(i), self.ideal_point(j))

    def find_ideal_within(self, datum: str, m: int) -> int:
        return self.index_of_datum(datum[: m + 1])

    def whole_space_ball(self) -> IdealBall:
        return IdealBall(self.index_of_datum(""), Fraction(2))

    @staticmethod
    def cylinder_length_for_radius(r: Fraction) -> int:
        """Least m >= 0 with 2^-m < r: B(s, r) is the length-m cylinder at s."""
        if r <= 0:
            raise ValueError("radius must be positive")
        m = 0
        while Fraction(1, 1 << m) >= r:
            m += 1
        return m

    def ball_cylinder(self, ball: IdealBall) -> str:
        r = ball.radius
        if not isinstance(r, Fraction):
            raise UnsupportedError("exact regions need rational radii")
        m = self.cylinder_length_for_radius(r)
        s = self.ideal_point(ball.center)
        return s[:m].ljust(m, "0")

    def cylinder_ball(self, word: str) -> IdealBall:
        """A ball whose region is exactly the given cylinder."""
        return IdealBall(self.index_of_datum(word), Fraction(3, 2 << len(word)))

    def ball_region(self, ball: IdealBall) -> "PrefixRegion":
        return PrefixRegion([self.ball_cylinder(ball)])

    def refinement_cells(self, level: int) -> list[IdealBall]:
        return [self.cylinder_ball(format(v, f"0{level}b") if level else "")
                for v in range(1 << level)]


class TorusSpace(SpaceDescriptor):
    """Flat d-torus: per-coordinate circle distance, max over coordinates."""

    def __init__(self, dim: int):
        self.dim = dim
        self.name = "circle" if dim == 1 else f"torus{dim}"
        self.diameter = Fraction(1, 2)

    def ideal_point(self, i: int) -> tuple[Fraction, ...]:
        idx = [i]
        for _ in range(self.dim - 1):
            a, b = unpair(idx.pop())
            idx.extend([a, b])
        return tuple(_dyadic_unit_datum(k, include_one=False) for k in idx)

    def index_of_datum(self, datum) -> int:
        datum = tuple(Fraction(c) for c in datum)
        idx = [_dyadic_unit_index(c, include_one=False) for c in datum]
        while len(idx) > 1:
            b = idx.pop()
            a = idx.pop()
            idx.append(pair(a, b))
        return idx[0]

    def datum_distance(self, a, b) -> Fraction:
        return max(_circle_distance(Fraction(x), Fraction(y))
                   for x, y in zip(a, b))

    def ideal_distance_exact(self, i: int, j: int) -> Fraction:
        return self.datum_distance(self.ideal_point(i), self.ideal_point(j))

    def find_ideal_within(self, datum, m: int) -> int:
        grid = 1 << (m + 1)
        rounded = []
        for c in datum:
            k = round(Fraction(c) * grid) % grid
            rounded.append(Fraction(k, grid))
        return self.index_of_datum(tuple(rounded))

    def whole_space_ball(self) -> IdealBall:
        return IdealBall(self.index_of_datum((Fraction(0),) * self.dim), Fraction(1))

    def ball_region(self, ball: IdealBall) -> "TorusRegion":
        c = self.ideal_point(ball.center)
        r = ball.radius
        if not isinstance(r, Fraction):
            raise UnsupportedError("exact regions need rational radii")
        return TorusRegion.from_arcs(self.dim, [(ci, r) for ci in c])

    def refinement_cells(self, level: int) -> list[IdealBall]:
        side = Fraction(1, 1 << level)
        cells = []
        coords = [Fraction(2 * j + 1, 1 << (level + 1)) for j in range(1 << level)]
        def rec(prefix):
            if len(prefix) == self.dim:
                cells.append(IdealBall(self.index_of_datum(tuple(prefix)), side / 2))
                return
            for c in coords:
                rec(prefix + [c])
        rec([])
        return cells


class NonNegRealsSpace(SpaceDescriptor):
    """[0, inf) with |x - y|; ideal points are the nonnegative rationals."""

    name = "nonneg_reals"
    diameter = None

    def ideal_point(self, i: int) -> Fraction:
        a, b = unpair(i)
        return Fraction(a, b + 1)

    def index_of_datum(self, datum: Fraction) -> int:
        fr = Fraction(datum)
        return pair(fr.numerator, fr.denominator - 1)

    def datum_distance(self, a, b) -> Fraction:
        return abs(Fraction(a) - Fraction(b))

    def ideal_distance_exact(self, i: int, j: int) -> Fraction:
        return self.datum_distance(self.ideal_point(i), self.ideal_point(j))

    def find_ideal_within(self, datum, m: int) -> int:
        grid = 1 << (m + 1)
        k = max(0, round(Fraction(datum) * grid))
        return self.index_of_datum(Fraction(k, grid))


_BUILTIN_SPACES = {
    "cantor": CantorSpace,
    "interval": IntervalSpace,
    "torus2": lambda: TorusSpace(2),
    "nonneg_reals": NonNegRealsSpace,
    # internal extras used by dynamics and experiments
    "circle": lambda: TorusSpace(1),
    "torus3": lambda: TorusSpace(3),
}

_SPACE_CACHE: dict[str, SpaceDescriptor] = {}


def builtin_space(name: str) -> SpaceDescriptor:
    try:
        factory = _BUILTIN_SPACES[name]
    except KeyError:
        raise UnknownSpaceError(f"unknown space {name!r}; have {sorted(_BUILTIN_SPACES)}")
    if name not in _SPACE_CACHE:
        _SPACE_CACHE[name] = factory()
    return _SPACE_CACHE[name]


# ---------------------------------------------------------------------------
# Points

class Point:
    """A point given by a fast Cauchy sequence of ideal-point indices.

    Consecutive stages satisfy d(x_n, x_{n+1}) < 2^-n, so the limit is
    within 2^-(n-1) of stage n.  Points carrying an exact datum use the
    constant sequence and admit exact membership decisions.
    """

    def __init__(self, space: SpaceDescriptor,
                 stage_fn: Optional[Callable[[int], int]] = None,
                 exact_datum=None):
        self.space = space
        self.exact_datum = exact_datum
        if stage_fn is None:
            if exact_datum is None:
                raise ValueError("need a stage function or an exact datum")
            # exact data need not be ideal points (e.g. non-dyadic rational
            # orbit coordinates); stage by rounding toward the ideal grid
            stage_fn = lambda n: space.find_ideal_within(exact_datum, n + 2)
        self._stage = stage_fn

    def stage(self, n: int) -> int:
        return self._stage(n)

    def stage_datum(self, n: int):
        return self.space.ideal_point(self._stage(n))

    @classmethod
    def from_reals(cls, space: TorusSpace | IntervalSpace, coords: Sequence[ComputableReal]):
        """Point of a continuous space from computable-real coordinates."""
        if isinstance(space, IntervalSpace):
            def stage(n: int) -> int:
                q = coords[0].approx(n + 3).as_fraction()
                grid = 1 << (n + 2)
                k = max(0, min(grid, round(q * grid)))
                return space.index_of_datum(Fraction(k, grid))
            return cls(space, stage)
        def stage(n: int) -> int:
            grid = 1 << (n + 2)
            rounded = []
            for c in coords:
                q = c.approx(n + 3).as_fraction()
                rounded.append(Fraction(round(q * grid) % grid, grid))
            return space.index_of_datum(tuple(rounded))
        return cls(space, stage)


def distance(space: SpaceDescriptor, x: Point, y: Point) -> ComputableReal:
    """d(x, y) as a computable real.

    Stage n + 3 ideal points are within 2^-(n+2) of the limits, and the
    ideal distance is rounded on a 2^-(n+3) grid, so the total error stays
    under 2^-n.
    """
    def approx(n: int) -> DyadicRational:
        i = x.stage(n + 3)
        j = y.stage(n + 3)
        d = space.ideal_distance_exact(i, j)
        num = d.numerator << (n + 3)
        m = (2 * num + d.denominator) // (2 * d.denominator)
        return DyadicRational(m, -(n + 3))

    return ComputableReal(approx)


def membership_exact(space: SpaceDescriptor, datum, ball: IdealBall) -> int:
    """-1 strictly inside, +1 strictly outside, 0 exactly on the sphere."""
    d = space.datum_distance(datum, space.ideal_point(ball.center))
    r = ball.radius
    if not isinstance(r, Fraction):
        raise UnsupportedError("exact membership needs a rational radius")
    return (d > r) - (d < r)


def ball_membership(space: SpaceDescriptor, x: Point, ball: IdealBall,
                    n: int) -> Membership:
    """Sound three-valued membership at precision n."""
    qd = distance(space, x, Point(space, lambda _: ball.center)).approx(n).as_fraction()
    err = Fraction(1, 1 << n)
    r = ball.radius
    if isinstance(r, Fraction):
        r_lo = r_hi = r
    else:
        qr = r.approx(n).as_fraction()
        r_lo, r_hi = qr - err, qr + err
    if qd + err < r_lo:
        return Membership.INSIDE
    if qd - err > r_hi:
        return Membership.OUTSIDE
    return Membership.UNKNOWN


# ---------------------------------------------------------------------------
# Enumerable open sets

class EnumerableOpenSet:
    """A deterministic (possibly finite) enumeration of ideal balls."""

    def __init__(self, space: SpaceDescriptor,
                 ball_fn: Optional[Callable[[int], Optional[IdealBall]]] = None,
                 balls: Optional[Sequence[IdealBall]] = None,
                 is_whole_space: bool = False):
        self.space = space
        self.is_whole_space = is_whole_space
        if balls is not None:
            self._balls = list(balls)
            self._fn = None
        else:
            self._balls = None
            self._fn = ball_fn

    @classmethod
    def whole_space(cls, space: SpaceDescriptor) -> "EnumerableOpenSet":
        try:
            balls = [space.whole_space_ball()]
        except UnsupportedError:
            balls = []
        return cls(space, balls=balls, is_whole_space=True)

    @classmethod
    def from_balls(cls, space: SpaceDescriptor, balls: Sequence[IdealBall]) -> "EnumerableOpenSet":
        return cls(space, balls=list(balls))

    def ball(self, k: int) -> Optional[IdealBall]:
        if self._balls is not None:
            return self._balls[k] if k < len(self._balls) else None
        return self._fn(k)

    def balls_up_to(self, effort: int) -> list[IdealBall]:
        out = []
        for k in range(effort):
            b = self.ball(k)
            if b is None:
                break
            out.append(b)
        return out


# ---------------------------------------------------------------------------
# Exact region arithmetic for the built-ins

class IntervalRegion:
    """Finite union of open subintervals of [0, 1], exact rational endpoints.

    Stored with overlapping components merged but touching components kept
    separate, so containment tests see the missing boundary points.
    """

    def __init__(self, intervals: Sequence[tuple[Fraction, Fraction]]):
        self.intervals = _merge_overlapping(
            [(a, b) for a, b in intervals if a < b])

    @classmethod
    def from_interval(cls, a: Fraction, b: Fraction) -> "IntervalRegion":
        return cls([(a, b)])

    @classmethod
    def union(cls, regions: Sequence["IntervalRegion"]) -> "IntervalRegion":
        parts = []
        for r in regions:
            parts.extend(r.intervals)
        return cls(parts)

    def length(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def contains_interval(self, a: Fraction, b: Fraction) -> bool:
        """Is the open interval (a, b) a subset (exactly, not a.e.)?"""
        if a >= b:
            return True
        return any(c <= a and b <= d for c, d in self.intervals)

    def contains_point(self, x: Fraction) -> bool:
        return any(a < x < b for a, b in self.intervals)

    def intersect_interval(self, a: Fraction, b: Fraction) -> "IntervalRegion":
        out = []
        for c, d in self.intervals:
            lo, hi = max(a, c), min(b, d)
            if lo < hi:
                out.append((lo, hi))
        return IntervalRegion(out)


def _merge_overlapping(intervals):
    intervals = sorted(intervals)
    merged = []
    for a, b in intervals:
        if merged and a < merged[-1][1]:
            if b > merged[-1][1]:
                merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    return [tuple(iv) for iv in merged]


class PrefixRegion:
    """Union of cylinders of the Cantor space, as a canonical prefix antichain."""

    def __init__(self, words: Sequence[str]):
        kept: list[str] = []
        for w in sorted(set(words), key=len):
            if not any(w.startswith(p) for p in kept):
                kept.append(w)
        self.words = sorted(kept)

    @classmethod
    def union(cls, regions: Sequence["PrefixRegion"]) -> "PrefixRegion":
        words = []
        for r in regions:
            words.extend(r.words)
        return cls(words)

    def covers_cylinder(self, v: str) -> bool:
        """Exact containment of the cylinder v (handles sibling coverage)."""
        def covered(word: str, depth: int) -> bool:
            if any(word.startswith(p) for p in self.words):
                return True
            if depth == 0:
                return False
            if not any(w.startswith(word) for w in self.words):
                return False
            return covered(word + "0", depth - 1) and covered(word + "1", depth - 1)

        budget = max((len(w) for w in self.words), default=0)
        return covered(v, max(0, budget - len(v)))

    def contains_sequence(self, bits: str) -> bool:
        """Does a sequence starting with these bits lie in the region
        regardless of its continuation?"""
        return any(bits.startswith(w) for w in self.words)


class TorusRegion:
    """Finite union of axis-aligned boxes on the flat d-torus.

    Boxes are stored with non-wrapping per-axis intervals inside [0, 1]
    (wrapping arcs are split on construction).  Measure and containment
    use exact sweeps; containment is up to the null grid skeleton, which
    is sufficient for the atomless torus measures shipped here.
    """

    def __init__(self, dim: int, boxes: Sequence[tuple[tuple[Fraction, Fraction], ...]]):
        self.dim = dim
        self.boxes = [b for b in boxes if all(lo < hi for lo, hi in b)]

    @classmethod
    def from_arcs(cls, dim: int, arcs: Sequence[tuple[Fraction, Fraction]]) -> "TorusRegion":
        """Product of circle arcs (center, radius) as a box union."""
        axis_intervals: list[list[tuple[Fraction, Fraction]]] = []
        for center, radius in arcs:
            axis_intervals.append(_arc_intervals(Fraction(center), Fraction(radius)))
        boxes = [()]
        for ivs in axis_intervals:
            boxes = [b + (iv,) for b in boxes for iv in ivs]
        return cls(dim, boxes)

    @classmethod
    def from_box(cls, dim: int, box) -> "TorusRegion":
        return cls(dim, [tuple(box)])

    @classmethod
    def union(cls, regions: Sequence["TorusRegion"]) -> "TorusRegion":
        dim = regions[0].dim
        boxes = []
        for r in regions:
            boxes.extend(r.boxes)
        return cls(dim, boxes)

    def volume(self) -> Fraction:
        return _union_volume(self.boxes, self.dim)

    def covers_box(self, box) -> bool:
        """Does the union cover the open box (up to null sets)?"""
        return _covers(self.boxes, tuple(box), self.dim)

    def contains_point(self, coords) -> bool:
        coords = [Fraction(c) for c in coords]
        return any(all(lo < c < hi for c, (lo, hi) in zip(coords, b))
                   for b in self.boxes)


def _arc_intervals(center: Fraction, radius: Fraction) -> list[tuple[Fraction, Fraction]]:
    if radius * 2 >= 1:
        return [(Fraction(0), Fraction(1))]
    lo = center - radius
    hi = center + radius
    lo -= lo.__floor__()
    hi = lo + 2 * radius
    if hi <= 1:
        return [(lo, hi)]
    return [(lo, Fraction(1)), (Fraction(0), hi - 1)]


def _union_volume(boxes, dim: int) -> Fraction:
    if not boxes:
        return Fraction(0)
    if dim == 0:
        return Fraction(1)
    cuts = sorted({b[0][0] for b in boxes} | {b[0][1] for b in boxes})
    total = Fraction(0)
    for lo, hi in zip(cuts, cuts[1:]):
        active = [b[1:] for b in boxes if b[0][0] <= lo and hi <= b[0][1]]
        if active:
            total += (hi - lo) * _union_volume(active, dim - 1)
    return total


def _covers(boxes, target, dim: int) -> bool:
    if dim == 0:
        return bool(boxes)
    t_lo, t_hi = target[0]
    if t_lo >= t_hi:
        return True
    cuts = sorted({t_lo, t_hi} |
                  {c for b in boxes for c in b[0] if t_lo < c < t_hi})
    for lo, hi in zip(cuts, cuts[1:]):
        active = [b[1:] for b in boxes if b[0][0] <= lo and hi <= b[0][1]]
        if not _covers(active, target[1:], dim - 1):
            return False
    return True
