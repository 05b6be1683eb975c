"""Binary representations: almost-decidable ball bases, point encoders and
decoders, and pushforward cylinder measures.

Two constructions are provided.

* The searched basis (build_basis) realizes the almost-decidable program:
  ball radii come off a dyadic grid, rejected whenever the sphere mass
  bracket at the recorded effort is too wide for any governed measure or
  the radius collides with an ideal-point distance.  Encoding is the
  membership-bit vector against the ordered basis, one ball per bit.

* The digit representation refines coordinates dyadically around a base
  point (possibly with irrational computable coordinates).  Its cells
  halve in measure every bit under translation-invariant measures, which
  is what deep-entropy experiments need; fixed ball arrangements cannot
  shrink cells exponentially in the depth, so they top out at shallow
  encodings.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence, Union

from .dyadic import DyadicRational
from .errors import EmptyCellError, SearchExhaustedError, UnsupportedError
from .measures import CantorMeasure, LebesgueInterval, LebesgueTorus, \
    MeasureOracle, ScaledMeasure
from .reals import ComputableReal
from .spaces import (CantorSpace, IdealBall, IntervalRegion, IntervalSpace,
                     Membership, Point, SpaceDescriptor, TorusSpace,
                     ball_membership, membership_exact)


class _Boundary:
    """Sentinel: the point could not be separated from some basis sphere."""

    def __repr__(self):
        return "Boundary"


BOUNDARY = _Boundary()

EncodeResult = Union[str, _Boundary]


# ---------------------------------------------------------------------------
# Almost-decidable basis search

class AlmostDecidableBasis:
    def __init__(self, space: SpaceDescriptor,
                 balls: Sequence[tuple[int, Fraction]],
                 quality: int, effort: int):
        self.space = space
        self.balls = [(int(c), Fraction(r)) for c, r in balls]
        self.quality = quality
        self.effort = effort

    def __len__(self):
        return len(self.balls)

    def ideal_ball(self, k: int) -> IdealBall:
        c, r = self.balls[k]
        return IdealBall(c, r)

    def serialize(self) -> str:
        lines = ["entropica-basis v1",
                 f"space={self.space.name} count={len(self.balls)} "
                 f"quality={self.quality} effort={self.effort}"]
        for c, r in self.balls:
            rd = DyadicRational.from_fraction(r)
            lines.append(f"{c} {rd.decimal_str()} {self.quality} {self.effort}")
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text: str, space: SpaceDescriptor) -> "AlmostDecidableBasis":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if lines[0] != "entropica-basis v1":
            raise ValueError("unrecognized basis header")
        meta = dict(item.split("=") for item in lines[1].split())
        if meta["space"] != space.name:
            raise ValueError(f"basis is for {meta['space']}, not {space.name}")
        balls = []
        for ln in lines[2:]:
            c, r, _q, _e = ln.split()
            balls.append((int(c), Fraction(r)))
        return cls(space, balls, int(meta["quality"]), int(meta["effort"]))


def _distance_avoid_set(space: SpaceDescriptor, count: int) -> set[Fraction]:
    scan = count + 4
    avoid = set()
    for i in range(scan):
        for j in range(i + 1, scan):
            avoid.add(space.ideal_distance_exact(i, j))
    avoid.discard(Fraction(0))
    return avoid


def build_basis(space: SpaceDescriptor, mu: MeasureOracle,
                nu: Optional[MeasureOracle], count: int, quality: int,
                max_grid_level: int = 10, effort: int = 14) -> AlmostDecidableBasis:
    """Find `count` almost-decidable balls centered on the first ideal points.

    A candidate radius r is admissible when, for every governed measure,
    upper(B(c, r + eps)) - lower(B(c, r)) < 1/quality at the recorded
    effort (eps shrinks with the grid), and r avoids the pairwise
    ideal-point distances of the scanned prefix.  The first admissible
    grid value wins, scanning dyadic grids of increasing resolution over
    the middle of [0, diameter].
    """
    if quality < 1:
        raise ValueError("quality must be >= 1")
    if space.diameter is None:
        raise UnsupportedError("basis search needs a bounded space")
    governed = [mu] + ([nu] if nu is not None else [])
    diameter = space.diameter
    avoid = _distance_avoid_set(space, count)
    tolerance = Fraction(1, quality)

    balls = []
    for k in range(count):
        found = None
        for level in range(2, max_grid_level + 1):
            step = diameter / (1 << level)
            eps = step / 4
            for m in range(1, 1 << level, 2):  # odd multiples: new at this level
                r = m * step
                if not (diameter / 4 <= r <= 3 * diameter / 4):
                    continue
                if r in avoid:
                    continue
                ok = True
                for meas in governed:
                    outer = meas.union_upper([IdealBall(k, r + eps)], effort)
                    inner = meas.union_lower([IdealBall(k, r)], effort)
                    if outer - inner >= tolerance:
                        ok = False
                        break
                if ok:
                    found = r
                    break
            if found is not None:
                break
        if found is None:
            raise SearchExhaustedError(
                f"no admissible radius for ball {k} at quality {quality}")
        balls.append((k, found))
    return AlmostDecidableBasis(space, balls, quality, effort)


# ---------------------------------------------------------------------------
# Membership-vector representation

class BinaryRepresentation:
    """Encode points as membership bits against an ordered ball basis."""

    def __init__(self, space: SpaceDescriptor, basis: AlmostDecidableBasis,
                 mu: MeasureOracle, nu: Optional[MeasureOracle] = None,
                 decode_reach: int = 4096):
        self.space = space
        self.basis = basis
        self.mu = mu
        self.nu = nu
        self.decode_reach = decode_reach
        self._union_cache: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}

    @property
    def depth_limit(self) -> int:
        return len(self.basis)

    # ---- encoding ----

    def encode(self, x: Point, depth: int, precision: int) -> EncodeResult:
        if depth < 1 or depth > len(self.basis):
            raise ValueError(f"depth must be in 1..{len(self.basis)}")
        bits = []
        exact = x.exact_datum
        for k in range(depth):
            ball = self.basis.ideal_ball(k)
            if exact is not None:
                side = membership_exact(self.space, exact, ball)
                if side == 0:
                    return BOUNDARY
                bits.append("1" if side < 0 else "0")
            else:
                m = ball_membership(self.space, x, ball, precision)
                if m == Membership.UNKNOWN:
                    return BOUNDARY
                bits.append("1" if m == Membership.INSIDE else "0")
        return "".join(bits)

    # ---- decoding ----

    def _datum_in_cell(self, datum, bits: str) -> bool:
        for k, b in enumerate(bits):
            side = membership_exact(self.space, datum, self.basis.ideal_ball(k))
            if b == "1" and side >= 0:
                return False
            if b == "0" and side < 0:
                return False
        return True

    def decode(self, bits: str, precision: int = 0) -> Point:
        """First ideal point consistent with the cell named by the bits.

        Points on a 0-bit sphere count as consistent (closure of the
        complement); a cell with no consistent ideal point within the
        search reach raises EmptyCellError.
        """
        if bits == "":
            return Point(self.space, lambda n: 0,
                         exact_datum=self.space.ideal_point(0))
        for i in range(self.decode_reach):
            datum = self.space.ideal_point(i)
            if self._datum_in_cell(datum, bits):
                return Point(self.space, exact_datum=datum)
        raise EmptyCellError(
            f"no ideal point among the first {self.decode_reach} lies in cell {bits}")

    # ---- cylinder bounds ----

    def _union_bounds(self, mask: int, effort: int) -> tuple[Fraction, Fraction]:
        key = (mask, effort)
        got = self._union_cache.get(key)
        if got is None:
            balls = [self.basis.ideal_ball(k)
                     for k in range(len(self.basis)) if mask >> k & 1]
            got = (self.mu.union_lower(balls, effort),
                   self.mu.union_upper(balls, effort))
            self._union_cache[key] = got
        return got

    def cylinder_bounds(self, bits: str, effort: int) -> tuple[Fraction, Fraction]:
        """Bracketing bounds on mu(cell(bits)) by inclusion-exclusion."""
        depth = len(bits)
        if depth == 0:
            return self.mu.total_mass_bounds(effort)
        if depth > 12:
            raise UnsupportedError("inclusion-exclusion beyond depth 12")

        # exact fast path: interval measures with exact region masses
        if isinstance(self.space, IntervalSpace) and hasattr(self.mu, "region_mass"):
            region = self._interval_cell_region(bits)
            mass = self.mu.region_mass(region)
            return mass, mass

        total_lo, total_hi = self.mu.total_mass_bounds(effort)
        # inter[I] brackets mu(intersection of balls in I)
        inter: dict[int, tuple[Fraction, Fraction]] = {0: (total_lo, total_hi)}

        def inter_bounds(mask: int) -> tuple[Fraction, Fraction]:
            got = inter.get(mask)
            if got is not None:
                return got
            lo = Fraction(0)
            hi = Fraction(0)
            sub = mask
            while sub:
                sign = -1 if bin(sub).count("1") % 2 == 0 else 1
                u_lo, u_hi = self._union_bounds(sub, effort)
                if sign > 0:
                    lo += u_lo
                    hi += u_hi
                else:
                    lo -= u_hi
                    hi -= u_lo
                sub = (sub - 1) & mask
            got = (max(Fraction(0), lo), max(Fraction(0), hi))
            inter[mask] = got
            return got

        ones = 0
        zeros = []
        for k, b in enumerate(bits):
            if b == "1":
                ones |= 1 << k
            else:
                zeros.append(1 << k)

        lo = Fraction(0)
        hi = Fraction(0)
        zmask = 0
        for t in range(1 << len(zeros)):
            tm = 0
            cnt = 0
            for idx, bit in enumerate(zeros):
                if t >> idx & 1:
                    tm |= bit
                    cnt += 1
            i_lo, i_hi = inter_bounds(ones | tm)
            if cnt % 2 == 0:
                lo += i_lo
                hi += i_hi
            else:
                lo -= i_hi
                hi -= i_lo
        return max(Fraction(0), lo), max(hi, Fraction(0))

    def _interval_cell_region(self, bits: str) -> IntervalRegion:
        pieces = [(Fraction(0), Fraction(1))]
        for k, b in enumerate(bits):
            ball = self.basis.ideal_ball(k)
            c = self.space.ideal_point(ball.center)
            lo, hi = max(Fraction(0), c - ball.radius), min(Fraction(1), c + ball.radius)
            out = []
            for a, bb in pieces:
                if b == "1":
                    x, y = max(a, lo), min(bb, hi)
                    if x < y:
                        out.append((x, y))
                else:
                    if a < lo:
                        out.append((a, min(bb, lo)))
                    if hi < bb:
                        out.append((max(a, hi), bb))
            pieces = out
            if not pieces:
                break
        return IntervalRegion(pieces)

    # ---- cell geometry ----

    def cell_diameter_bound(self, bits: str, level: int = 10) -> Fraction:
        """Upper bound on the diameter of cell(bits) via refinement cells."""
        space = self.space
        kept = []
        for cell in space.refinement_cells(level):
            excluded = False
            for k, b in enumerate(bits):
                ball = self.basis.ideal_ball(k)
                rel = _cell_ball_relation(space, cell, ball)
                if b == "1" and rel == "disjoint":
                    excluded = True
                    break
                if b == "0" and rel == "contained":
                    excluded = True
                    break
            if not excluded:
                kept.append(cell)
        if not kept:
            return Fraction(0)
        return _cells_extent(space, kept)


def _cell_ball_relation(space: SpaceDescriptor, cell: IdealBall,
                        ball: IdealBall) -> str:
    """'contained', 'disjoint', or 'partial' for a refinement cell vs a ball."""
    if isinstance(space, IntervalSpace):
        c = space.ideal_point(cell.center)
        a, b = c - cell.radius, c + cell.radius
        bc = space.ideal_point(ball.center)
        lo, hi = bc - ball.radius, bc + ball.radius
        if lo <= a and b <= hi:
            return "contained"
        if b <= lo or a >= hi:
            return "disjoint"
        return "partial"
    if isinstance(space, CantorSpace):
        v = space.ball_cylinder(cell)
        w = space.ball_cylinder(ball)
        if v.startswith(w):
            return "contained"
        if w.startswith(v):
            return "partial"
        return "disjoint"
    if isinstance(space, TorusSpace):
        region = space.ball_region(ball)
        c = space.ideal_point(cell.center)
        box = tuple((ci - cell.radius, ci + cell.radius) for ci in c)
        if region.covers_box(box):
            return "contained"
        probe = space.ball_region(cell)
        for b1 in probe.boxes:
            for b2 in region.boxes:
                if all(max(l1, l2) < min(h1, h2)
                       for (l1, h1), (l2, h2) in zip(b1, b2)):
                    return "partial"
        return "disjoint"
    raise UnsupportedError(f"no cell geometry for {space.name}")


def _cells_extent(space: SpaceDescriptor, cells: Sequence[IdealBall]) -> Fraction:
    if isinstance(space, IntervalSpace):
        data = [space.ideal_point(c.center) for c in cells]
        radii = [c.radius for c in cells]
        return (max(d + r for d, r in zip(data, radii))
                - min(d - r for d, r in zip(data, radii)))
    if isinstance(space, CantorSpace):
        words = [space.ball_cylinder(c) for c in cells]
        first = words[0]
        lcp = len(first)
        for w in words[1:]:
            k = 0
            while k < min(lcp, len(w)) and w[k] == first[k]:
                k += 1
            lcp = k
        if len(words) == 1:
            return Fraction(1, 1 << len(first))
        return Fraction(1, 1 << lcp)
    if isinstance(space, TorusSpace):
        dim = space.dim
        bound = Fraction(0)
        for axis in range(dim):
            los = [space.ideal_point(c.center)[axis] - c.radius for c in cells]
            his = [space.ideal_point(c.center)[axis] + c.radius for c in cells]
            extent = max(his) - min(los)
            bound = max(bound, min(extent, Fraction(1, 2)))
        return bound
    raise UnsupportedError(f"no cell geometry for {space.name}")


# ---------------------------------------------------------------------------
# Digit representation

class DigitRepresentation:
    """Nested dyadic refinement around a base point.

    Bit d*m+i (for a d-dimensional space, i < d) is digit m+1 of
    frac(coordinate_i - base_i); cells are half-open dyadic boxes
    translated by the base point, so their mass under translation-
    invariant measures is exactly total_mass * 2^-depth.  The base point
    itself encodes to all zeros.  Base coordinates may be exact rationals
    (digits of exactly known points are then decided exactly, taking the
    terminating expansion on the grid) or computable reals (digits carry a
    margin check against the approximation error and abstain when the
    value sits too close to the dyadic grid).

    On Cantor space this degenerates to the identity representation.
    """

    def __init__(self, space: SpaceDescriptor, mu: MeasureOracle,
                 base: Optional[Sequence[Union[Fraction, ComputableReal]]] = None,
                 guard_bits: int = 48):
        self.space = space
        self.mu = mu
        self.guard_bits = guard_bits
        if isinstance(space, CantorSpace):
            if not hasattr(mu, "cylinder_mass"):
                raise UnsupportedError("cantor digit representation needs a "
                                       "cylinder-exact measure")
            self.dim = 0
            self.base = None
        elif isinstance(space, (IntervalSpace, TorusSpace)):
            inner = mu.inner if isinstance(mu, ScaledMeasure) else mu
            if not isinstance(inner, (LebesgueInterval, LebesgueTorus)):
                raise UnsupportedError("digit representation needs a "
                                       "translation-invariant measure")
            self.dim = space.dim if isinstance(space, TorusSpace) else 1
            if base is None:
                base = [Fraction(0)] * self.dim
            if len(base) != self.dim:
                raise ValueError("base point dimension mismatch")
            if isinstance(space, IntervalSpace) and any(
                    not isinstance(b, Fraction) for b in base):
                # wrapped cells would not be intervals under |x - y|
                raise UnsupportedError("interval digit representation needs "
                                       "an exact rational base")
            self.base = list(base)
        else:
            raise UnsupportedError(f"no digit representation for {space.name}")

    @property
    def depth_limit(self) -> int:
        return 1 << 20

    def _base_value(self, i: int, prec: int) -> tuple[Fraction, bool]:
        b = self.base[i]
        if isinstance(b, Fraction):
            return b, True
        return b.approx(prec).as_fraction(), False

    # ---- encoding ----

    def encode(self, x: Point, depth: int, precision: int) -> EncodeResult:
        if isinstance(self.space, CantorSpace):
            return self._encode_cantor(x, depth)
        per_coord = [(depth + self.dim - 1 - i) // self.dim
                     for i in range(self.dim)]
        prec = max(precision, depth) + self.guard_bits
        known = getattr(x, "digit_offsets", None) \
            if getattr(x, "digit_base_rep", None) is self else None
        digit_streams = []
        for i in range(self.dim):
            if known is not None:
                # point built by decode: offset from the base is known exactly
                value, exact = known[i], True
            else:
                value, exact = self._coord_offset(x, i, prec)
            stream = self._digits(value, exact, per_coord[i], prec)
            if stream is None:
                return BOUNDARY
            digit_streams.append(stream)
        bits = []
        counters = [0] * self.dim
        for k in range(depth):
            i = k % self.dim
            bits.append(digit_streams[i][counters[i]])
            counters[i] += 1
        return "".join(bits)

    def _encode_cantor(self, x: Point, depth: int) -> EncodeResult:
        if x.exact_datum is not None:
            s = x.exact_datum
            return (s + "0" * depth)[:depth]
        # the stage depth+1 ideal point agrees with the limit to depth bits
        datum = x.space.ideal_point(x.stage(depth + 1))
        return (datum + "0" * depth)[:depth]

    def _coord_offset(self, x: Point, i: int, prec: int) -> tuple[Fraction, bool]:
        base_q, base_exact = self._base_value(i, prec)
        coords = getattr(x, "coord_reals", None)
        if coords is not None:
            q, q_exact = coords[i].approx(prec).as_fraction(), False
        elif x.exact_datum is not None:
            datum = x.exact_datum
            q = Fraction(datum[i]) if isinstance(datum, tuple) else Fraction(datum)
            q_exact = True
        else:
            datum = x.stage_datum(prec)
            q = Fraction(datum[i]) if isinstance(datum, tuple) else Fraction(datum)
            q_exact = False
        w = q - base_q
        return w - w.__floor__(), base_exact and q_exact

    def _digits(self, value: Fraction, exact: bool, count: int,
                prec: int) -> Optional[str]:
        grid = 1 << count
        scaled = value * grid
        k = scaled.__floor__() % grid
        if not exact:
            # value carries approximation error < 2^-(prec-2); refuse digits
            # when the true value could sit on the other side of the grid
            err = Fraction(grid, 1 << (prec - 2))
            margin = min(scaled - scaled.__floor__(),
                         scaled.__floor__() + 1 - scaled)
            if margin <= err:
                return None
        return format(k, f"0{count}b") if count else ""

    # ---- decoding ----

    def decode(self, bits: str, precision: int = 0) -> Point:
        """The corner point of the half-open cell named by the bits."""
        if isinstance(self.space, CantorSpace):
            return Point(self.space, exact_datum=bits)
        offsets = [Fraction(0)] * self.dim
        counters = [0] * self.dim
        for k, b in enumerate(bits):
            i = k % self.dim
            counters[i] += 1
            if b == "1":
                offsets[i] += Fraction(1, 1 << counters[i])
        if all(isinstance(b, Fraction) for b in self.base):
            coords = []
            for i in range(self.dim):
                v = self.base[i] + offsets[i]
                coords.append(v - v.__floor__())
            if isinstance(self.space, IntervalSpace):
                pt = Point(self.space, exact_datum=coords[0])
            else:
                pt = Point(self.space, exact_datum=tuple(coords))
        else:
            coords = [_shifted_real(self.base[i], offsets[i])
                      for i in range(self.dim)]
            pt = Point.from_reals(self.space, coords)
            pt.coord_reals = coords
        pt.digit_base_rep = self
        pt.digit_offsets = offsets
        return pt

    # ---- cylinder bounds ----

    def cylinder_bounds(self, bits: str, effort: int) -> tuple[Fraction, Fraction]:
        if isinstance(self.space, CantorSpace):
            mass = self.mu.cylinder_mass(bits)
            return mass, mass
        lo, hi = self.mu.total_mass_bounds(effort + len(bits))
        f = Fraction(1, 1 << len(bits))
        return lo * f, hi * f

    def cell_diameter_bound(self, bits: str, level: int = 0) -> Fraction:
        if isinstance(self.space, CantorSpace):
            return Fraction(1, 1 << len(bits))
        per_coord = len(bits) // self.dim
        return min(Fraction(1, 1 << per_coord),
                   self.space.diameter or Fraction(1))


def _shifted_real(base, off: Fraction) -> ComputableReal:
    """base + off reduced mod 1, with the integer part pinned once so the
    approximator stays fast-Cauchy consistent near the wrap point."""
    if isinstance(base, Fraction):
        v = base + off
        return ComputableReal.from_fraction(v - v.__floor__())
    probe = base.approx(8).as_fraction() + off
    shift = probe.__floor__()
    sd = DyadicRational.from_fraction(Fraction(shift))
    offd = DyadicRational.from_fraction(off)
    return ComputableReal(lambda n: base.approx(n + 1) + offd - sd)


Representation = Union[BinaryRepresentation, DigitRepresentation]


# ---------------------------------------------------------------------------
# Cylinder-measure adapters (what the deficiency estimator consumes)

class CylinderMeasure:
    """Bracketing bounds on the pushforward measure of encoded cells."""

    def __init__(self, source, name: str = ""):
        self.source = source
        if isinstance(source, (BinaryRepresentation, DigitRepresentation)):
            self._bounds = source.cylinder_bounds
            self._mu = source.mu
        elif isinstance(source, MeasureOracle):
            if not isinstance(source.space, CantorSpace):
                raise UnsupportedError(
                    "a bare measure oracle works as a cylinder measure only "
                    "on Cantor space")
            self._mu = source
            space: CantorSpace = source.space
            if hasattr(source, "cylinder_mass"):
                self._bounds = lambda bits, effort: (
                    source.cylinder_mass(bits), source.cylinder_mass(bits))
            else:
                self._bounds = lambda bits, effort: (
                    source.union_lower([space.cylinder_ball(bits)], effort),
                    source.union_upper([space.cylinder_ball(bits)], effort))
        else:
            raise TypeError(f"cannot view {source!r} as a cylinder measure")
        self.name = name or f"cylinders({getattr(source, 'name', '?')})"

    def bounds(self, bits: str, effort: int) -> tuple[Fraction, Fraction]:
        return self._bounds(bits, effort)

    def upper(self, bits: str, effort: int) -> Fraction:
        return self._bounds(bits, effort)[1]

    def total_mass_bounds(self, effort: int) -> tuple[Fraction, Fraction]:
        return self._mu.total_mass_bounds(effort)
