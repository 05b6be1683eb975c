"""Computable measure-preserving dynamics.

Built-in systems: rotation and torus translation flows (continuous time),
the baker and cat maps on the 2-torus and the shift on Cantor space
(discrete time), and the baker-rotation suspension flow on the 3-torus:
G^t(x, y, z) = (baker^k(x, y), z + t mod 1) with k = floor(N(t+z)) -
floor(Nz) for an integer speed N.  The suspension satisfies the group law
exactly because N is an integer, and it composes the chaotic discrete map
with a continuous rotation into one continuous-parameter family.

All maps evaluate exactly on rational data; points with computable-real
coordinates go through precision inflation with the per-system expansion
constant (baker: 1 bit per step, cat: 2 bits per step).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import PrecisionUnreachableError, UnknownSystemError
from .measures import MeasureOracle, builtin_measure
from .reals import ComputableReal, Comparison, compare_apart
from .rng import CounterRng
from .spaces import (CantorSpace, IdealBall, Point, SpaceDescriptor,
                     TorusSpace, builtin_space, distance, membership_exact)

Time = Union[int, Fraction, ComputableReal]


class GroupLawResult(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INDISTINGUISHABLE = "indistinguishable"


def _frac(x: Fraction) -> Fraction:
    return x - x.__floor__()


def baker_step(x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
    # dyadic boundary x = 1/2 takes the upper branch (left-limit convention)
    b = 1 if x >= Fraction(1, 2) else 0
    return _frac(2 * x), (y + b) / 2


def baker_step_inverse(u: Fraction, v: Fraction) -> tuple[Fraction, Fraction]:
    b = 1 if v >= Fraction(1, 2) else 0
    return (u + b) / 2, _frac(2 * v)


def cat_step(x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
    return _frac(2 * x + y), _frac(x + y)


def cat_step_inverse(u: Fraction, v: Fraction) -> tuple[Fraction, Fraction]:
    return _frac(u - v), _frac(-u + 2 * v)


class TransformationGroup:
    name: str
    space: SpaceDescriptor
    time_kind: str                      # "continuous" | "discrete"
    declared_invariant_measure: MeasureOracle
    reversible: bool = True
    expansion_bits_per_step: int = 0    # c_sys for precision accounting

    def evolve_datum(self, t: Time, datum):
        """Exact orbit evaluation on rational data; None when inapplicable."""
        return None

    def evolve_point(self, t: Time, x: Point, precision: int) -> Point:
        raise NotImplementedError

    def _check_time(self, t: Time):
        if self.time_kind == "discrete":
            if not isinstance(t, int):
                raise ValueError(f"{self.name} takes integer times")
            if not self.reversible and t < 0:
                raise ValueError(f"{self.name} is not invertible; t must be >= 0")


class _IteratedMap(TransformationGroup):
    """Discrete system defined by an exact step on tuple data."""

    time_kind = "discrete"

    def _step(self, datum):
        raise NotImplementedError

    def _step_inverse(self, datum):
        raise NotImplementedError

    def evolve_datum(self, t: int, datum):
        self._check_time(t)
        for _ in range(abs(t)):
            datum = self._step(datum) if t > 0 else self._step_inverse(datum)
        return datum

    def evolve_point(self, t: int, x: Point, precision: int) -> Point:
        self._check_time(t)
        if x.exact_datum is not None:
            return Point(self.space, exact_datum=self.evolve_datum(t, x.exact_datum))
        # inflate precision to cover the expansion of |t| steps
        need = precision + abs(t) * self.expansion_bits_per_step + 2
        if need > 1 << 20:
            raise PrecisionUnreachableError(
                f"{self.name}: cannot certify 2^-{precision} after {t} steps")
        datum = x.stage_datum(need)
        # branch decisions on the approximation are only trusted away from
        # the discontinuity set; dyadic-stage data decide exactly
        out = self.evolve_datum(t, datum)
        return Point(self.space, exact_datum=out)


class BakerMap(_IteratedMap):
    name = "bakers_map"
    expansion_bits_per_step = 1

    def __init__(self):
        self.space = builtin_space("torus2")
        self.declared_invariant_measure = builtin_measure("lebesgue_torus2")

    def _step(self, datum):
        return baker_step(*datum)

    def _step_inverse(self, datum):
        return baker_step_inverse(*datum)


class CatMap(_IteratedMap):
    name = "cat_map"
    expansion_bits_per_step = 2

    def __init__(self):
        self.space = builtin_space("torus2")
        self.declared_invariant_measure = builtin_measure("lebesgue_torus2")

    def _step(self, datum):
        return cat_step(*datum)

    def _step_inverse(self, datum):
        return cat_step_inverse(*datum)


class CantorShift(TransformationGroup):
    """One-sided shift; a semigroup (t >= 0): the shift discards bits, so
    no inverse exists and reversibility checks do not apply."""

    name = "shift_cantor"
    time_kind = "discrete"
    reversible = False

    def __init__(self, measure: Optional[MeasureOracle] = None):
        self.space = builtin_space("cantor")
        self.declared_invariant_measure = measure or builtin_measure("uniform_cantor")

    def evolve_datum(self, t: int, datum: str) -> str:
        self._check_time(t)
        return datum[t:]

    def evolve_point(self, t: int, x: Point, precision: int) -> Point:
        self._check_time(t)
        if x.exact_datum is not None:
            return Point(self.space, exact_datum=x.exact_datum[t:])
        datum = x.stage_datum(precision + t + 2)
        return Point(self.space, exact_datum=datum[t:])


class RotationFlow(TransformationGroup):
    """x -> x + t*omega mod 1 on the circle."""

    name = "rotation_flow"
    time_kind = "continuous"

    def __init__(self, omega: Union[Fraction, ComputableReal]):
        self.space = builtin_space("circle")
        self.declared_invariant_measure = builtin_measure("lebesgue_circle")
        self.omega = omega

    def _shift(self, t: Time) -> Union[Fraction, ComputableReal]:
        if isinstance(t, int):
            t = Fraction(t)
        if isinstance(self.omega, Fraction) and isinstance(t, Fraction):
            return t * self.omega
        om = self.omega if isinstance(self.omega, ComputableReal) \
            else ComputableReal.from_fraction(self.omega)
        tr = t if isinstance(t, ComputableReal) else ComputableReal.from_fraction(t)
        return tr * om

    def evolve_datum(self, t: Time, datum):
        shift = self._shift(t)
        if isinstance(shift, Fraction):
            c = datum[0] if isinstance(datum, tuple) else datum
            return (_frac(Fraction(c) + shift),)
        return None

    def evolve_point(self, t: Time, x: Point, precision: int) -> Point:
        shift = self._shift(t)
        if x.exact_datum is not None and isinstance(shift, Fraction):
            return Point(self.space, exact_datum=self.evolve_datum(t, x.exact_datum))
        base = getattr(x, "coord_reals", None)
        if base is not None:
            x_real = base[0]
        elif x.exact_datum is not None:
            c = x.exact_datum[0] if isinstance(x.exact_datum, tuple) else x.exact_datum
            x_real = ComputableReal.from_fraction(Fraction(c))
        else:
            x_real = ComputableReal(lambda n: _stage_coord(x, n, 0))
        shift_real = shift if isinstance(shift, ComputableReal) \
            else ComputableReal.from_fraction(shift)
        out = x_real + shift_real
        pt = Point.from_reals(self.space, [out])
        pt.coord_reals = [out]
        return pt


def _stage_coord(x: Point, n: int, axis: int):
    from .dyadic import DyadicRational
    datum = x.stage_datum(n + 1)
    c = datum[axis] if isinstance(datum, tuple) else datum
    return DyadicRational.from_fraction(Fraction(c))


class TorusTranslationFlow(TransformationGroup):
    """Per-coordinate rotation flow on the 2-torus."""

    name = "torus_translation_flow"
    time_kind = "continuous"

    def __init__(self, omega1, omega2):
        self.space = builtin_space("torus2")
        self.declared_invariant_measure = builtin_measure("lebesgue_torus2")
        self.omegas = (omega1, omega2)

    def evolve_datum(self, t: Time, datum):
        if isinstance(t, int):
            t = Fraction(t)
        if not isinstance(t, Fraction) or not all(
                isinstance(o, Fraction) for o in self.omegas):
            return None
        return tuple(_frac(Fraction(c) + t * o)
                     for c, o in zip(datum, self.omegas))

    def evolve_point(self, t: Time, x: Point, precision: int) -> Point:
        exact = self.evolve_datum(t, x.exact_datum) \
            if x.exact_datum is not None else None
        if exact is not None:
            return Point(self.space, exact_datum=exact)
        tr = t if isinstance(t, ComputableReal) else \
            ComputableReal.from_fraction(Fraction(t))
        coords = []
        for axis, o in enumerate(self.omegas):
            om = o if isinstance(o, ComputableReal) else \
                ComputableReal.from_fraction(Fraction(o))
            base = getattr(x, "coord_reals", None)
            x_real = base[axis] if base is not None else \
                ComputableReal(lambda n, a=axis: _stage_coord(x, n, a))
            coords.append(x_real + tr * om)
        pt = Point.from_reals(self.space, coords)
        pt.coord_reals = coords
        return pt


class BakerRotationFlow(TransformationGroup):
    """Suspension of the baker map driven by a circle rotation.

    G^t(x, y, z) = (baker^k(x, y), z + t mod 1), k = floor(N(t+z)) -
    floor(Nz).  The integer speed N makes the cocycle exact: composing
    G^s after G^t applies exactly floor(N(s+t+z)) - floor(Nz) steps.
    """

    name = "baker_rotation"
    time_kind = "continuous"
    expansion_bits_per_step = 1

    def __init__(self, speed: int = 1 << 19):
        if speed < 1:
            raise ValueError("speed must be a positive integer")
        self.speed = speed
        self.space = builtin_space("torus3")
        self.declared_invariant_measure = builtin_measure("lebesgue_torus3")

    def steps_between(self, t: Fraction, z: Fraction) -> int:
        n = self.speed
        return (n * (t + z)).__floor__() - (n * z).__floor__()

    def evolve_datum(self, t: Time, datum):
        if isinstance(t, int):
            t = Fraction(t)
        if not isinstance(t, Fraction):
            return None
        x, y, z = datum
        k = self.steps_between(t, Fraction(z))
        x, y = Fraction(x), Fraction(y)
        for _ in range(abs(k)):
            x, y = baker_step(x, y) if k > 0 else baker_step_inverse(x, y)
        return (x, y, _frac(Fraction(z) + t))

    def evolve_point(self, t: Time, x: Point, precision: int) -> Point:
        if x.exact_datum is None:
            raise PrecisionUnreachableError(
                "the suspension flow evaluates exact data only; wrap the "
                "point or use the experiment orbit evaluator")
        return Point(self.space, exact_datum=self.evolve_datum(t, x.exact_datum))


def builtin_dynamics(name: str, **params) -> TransformationGroup:
    """Systems by name: rotation_flow(omega), torus_translation_flow(o1,o2),
    bakers_map, cat_map, shift_cantor, baker_rotation(speed)."""
    if name == "bakers_map":
        return BakerMap()
    if name == "cat_map":
        return CatMap()
    if name == "shift_cantor":
        return CantorShift(params.get("measure"))
    if name == "rotation_flow":
        return RotationFlow(params.get("omega", Fraction(1, 4)))
    if name == "torus_translation_flow":
        return TorusTranslationFlow(params.get("omega1", Fraction(1, 4)),
                                    params.get("omega2", Fraction(1, 3)))
    if name == "baker_rotation":
        return BakerRotationFlow(params.get("speed", 1 << 19))
    raise UnknownSystemError(f"unknown system {name!r}")


def evolve(group: TransformationGroup, t: Time, x: Point, precision: int) -> Point:
    """G^t x as a point satisfying the fast Cauchy contract at `precision`."""
    return group.evolve_point(t, x, precision)


def check_group_law(group: TransformationGroup, t: Time, s: Time, x: Point,
                    precision: int) -> GroupLawResult:
    """Compare d(G^t(G^s x), G^{t+s} x) against 2^-(precision-2)."""
    inner = group.evolve_point(s, x, precision + 4)
    lhs = group.evolve_point(t, inner, precision + 4)
    if isinstance(t, int) and isinstance(s, int):
        ts = t + s
    else:
        ts = Fraction(t) + Fraction(s)
    rhs = group.evolve_point(ts, x, precision + 4)
    d = distance(group.space, lhs, rhs)
    threshold = ComputableReal.from_fraction(Fraction(4, 1 << precision))
    cmp = compare_apart(d, threshold, precision + 4)
    if cmp == Comparison.LESS:
        return GroupLawResult.PASS
    if cmp == Comparison.GREATER:
        return GroupLawResult.FAIL
    return GroupLawResult.INDISTINGUISHABLE


def check_reversibility(group: TransformationGroup, t: Time, x: Point,
                        precision: int) -> GroupLawResult:
    """Compare d(G^-t(G^t x), x) against 2^-(precision-2)."""
    fwd = group.evolve_point(t, x, precision + 4)
    back = group.evolve_point(-t if isinstance(t, int) else -Fraction(t),
                              fwd, precision + 4)
    d = distance(group.space, back, x)
    threshold = ComputableReal.from_fraction(Fraction(4, 1 << precision))
    cmp = compare_apart(d, threshold, precision + 4)
    if cmp == Comparison.LESS:
        return GroupLawResult.PASS
    if cmp == Comparison.GREATER:
        return GroupLawResult.FAIL
    return GroupLawResult.INDISTINGUISHABLE


@dataclass
class PreservationReport:
    system: str
    time: str
    samples: int
    hits: int
    estimate: float
    mass_lower: float
    mass_upper: float
    stderr: float
    passed: bool


def check_measure_preservation(group: TransformationGroup, t: Time,
                               region: Sequence[IdealBall], samples: int,
                               seed: int, effort: int = 16) -> PreservationReport:
    """Monte Carlo check of mu(G^-t(region)) = mu(region) at 3 sigma.

    Samples x from the declared invariant measure, evolves it, and tests
    exact membership of the image in the region.
    """
    mu = group.declared_invariant_measure
    rng = CounterRng(seed, f"preserve:{group.name}")
    hits = 0
    for i in range(samples):
        datum = mu.sample_datum(rng, i)
        image = group.evolve_datum(t, datum)
        if image is None:
            pt = group.evolve_point(t, Point(group.space, exact_datum=datum), 48)
            image = pt.exact_datum if pt.exact_datum is not None \
                else pt.stage_datum(48)
        if any(membership_exact(group.space, image, b) < 0 for b in region):
            hits += 1
    est = hits / samples
    lo = float(mu.union_lower(list(region), effort))
    hi = float(mu.union_upper(list(region), effort))
    mid = (lo + hi) / 2
    stderr = math.sqrt(max(mid * (1 - mid), 1e-12) / samples)
    passed = (lo - 3 * stderr) <= est <= (hi + 3 * stderr)
    return PreservationReport(group.name, str(t), samples, hits, est, lo, hi,
                              stderr, passed)
