"""Computable Borel measures via lower/upper bounds on finite ball unions.

The shipped measures (Lebesgue on interval and tori, uniform / Bernoulli
on Cantor, rational scalings, finite atomic measures and mixtures) are
analytically tractable: their bounds are exact at every effort, computed
through the spaces' region arithmetic.  The oracle interface still
carries an effort parameter so that genuinely converging oracles (see
QuantizedOracle, used in tests) fit the same contracts.

Also here: finite rational measures as the ideal points of the measure
space, and the Prokhorov metric on them.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .errors import UnknownMeasureError, UnsupportedError, ZeroMassError
from .reals import ComputableReal
from .rng import CounterRng
from .spaces import (CantorSpace, IdealBall, IntervalRegion, IntervalSpace,
                     NonNegRealsSpace, PrefixRegion, SpaceDescriptor,
                     TorusRegion, TorusSpace, builtin_space, membership_exact)


class MeasureOracle:
    """Bounds on measures of finite unions of ideal balls.

    union_lower is monotone nondecreasing in effort and converges to the
    true measure from below; union_upper brackets it from above.
    """

    name: str
    space: SpaceDescriptor
    is_probability: bool
    total_mass: ComputableReal
    total_mass_exact: Optional[Fraction] = None

    def union_lower(self, balls: Sequence[IdealBall], effort: int) -> Fraction:
        raise NotImplementedError

    def union_upper(self, balls: Sequence[IdealBall], effort: int) -> Fraction:
        raise NotImplementedError

    def total_mass_bounds(self, effort: int) -> tuple[Fraction, Fraction]:
        if self.total_mass_exact is not None:
            return self.total_mass_exact, self.total_mass_exact
        q = self.total_mass.approx(effort).as_fraction()
        err = Fraction(1, 1 << effort)
        return max(Fraction(0), q - err), q + err

    def sample_datum(self, rng: CounterRng, index: int):
        raise UnsupportedError(f"{self.name} is not sampleable")


def measure_union_lower(mu: MeasureOracle, balls: Sequence[IdealBall],
                        effort: int) -> Fraction:
    """Certified lower bound on mu(union of balls)."""
    if not balls:
        raise ValueError("need at least one ball")
    return mu.union_lower(balls, effort)


def measure_union_upper(mu: MeasureOracle, balls: Sequence[IdealBall],
                        effort: int) -> Fraction:
    if not balls:
        raise ValueError("need at least one ball")
    return mu.union_upper(balls, effort)


# ---------------------------------------------------------------------------
# Exact built-ins

class _ExactOracle(MeasureOracle):
    """Base for measures whose ball-union mass is exactly computable."""

    def exact_union(self, balls: Sequence[IdealBall]) -> Fraction:
        raise NotImplementedError

    def union_lower(self, balls, effort):
        return self.exact_union(balls)

    def union_upper(self, balls, effort):
        return self.exact_union(balls)


class LebesgueInterval(_ExactOracle):
    name = "lebesgue_interval"
    is_probability = True

    def __init__(self):
        self.space = builtin_space("interval")
        self.total_mass = ComputableReal.from_int(1)
        self.total_mass_exact = Fraction(1)

    def exact_union(self, balls):
        region = IntervalRegion.union([self.space.ball_region(b) for b in balls])
        return region.length()

    def region_mass(self, region: IntervalRegion) -> Fraction:
        return region.length()

    def sample_datum(self, rng, index, resolution_bits: int = 64):
        return rng.unit_fraction(index, resolution_bits)


class LebesgueTorus(_ExactOracle):
    is_probability = True

    def __init__(self, dim: int):
        self.space = builtin_space("circle" if dim == 1 else f"torus{dim}")
        self.dim = dim
        self.name = f"lebesgue_{self.space.name}"
        self.total_mass = ComputableReal.from_int(1)
        self.total_mass_exact = Fraction(1)

    def exact_union(self, balls):
        region = TorusRegion.union([self.space.ball_region(b) for b in balls])
        return region.volume()

    def region_mass(self, region: TorusRegion) -> Fraction:
        return region.volume()

    def sample_datum(self, rng, index, resolution_bits: int = 64):
        coords = tuple(
            Fraction(rng.bits(index, resolution_bits * self.dim)
                     >> (resolution_bits * k) & ((1 << resolution_bits) - 1),
                     1 << resolution_bits)
            for k in range(self.dim))
        return coords


class CantorMeasure(_ExactOracle):
    """I.i.d. coin measure on Cantor space: P(bit = 1) = p."""

    def __init__(self, p: Fraction):
        if not (0 < p < 1):
            raise ValueError("p must lie in (0, 1)")
        self.p = Fraction(p)
        self.space = builtin_space("cantor")
        self.name = "uniform_cantor" if p == Fraction(1, 2) else f"bernoulli({p})"
        self.is_probability = True
        self.total_mass = ComputableReal.from_int(1)
        self.total_mass_exact = Fraction(1)

    def cylinder_mass(self, word: str) -> Fraction:
        ones = word.count("1")
        zeros = len(word) - ones
        return self.p ** ones * (1 - self.p) ** zeros

    def exact_union(self, balls):
        space: CantorSpace = self.space
        region = PrefixRegion([space.ball_cylinder(b) for b in balls])
        return sum((self.cylinder_mass(w) for w in region.words), Fraction(0))

    def region_mass(self, region: PrefixRegion) -> Fraction:
        return sum((self.cylinder_mass(w) for w in region.words), Fraction(0))

    def sample_datum(self, rng, index, length: int = 64) -> str:
        if self.p == Fraction(1, 2):
            return rng.bitstring(index, length)
        num, den = self.p.numerator, self.p.denominator
        draws = rng.bits(index, 32 * length)
        out = []
        for k in range(length):
            r = (draws >> (32 * k)) & 0xFFFFFFFF
            out.append("1" if r * den < num << 32 else "0")
        return "".join(out)


class ScaledMeasure(MeasureOracle):
    """c times another measure, c a positive rational."""

    def __init__(self, inner: MeasureOracle, c: Fraction):
        if c <= 0:
            raise ValueError("scale must be positive")
        self.inner = inner
        self.c = Fraction(c)
        self.space = inner.space
        self.name = f"scaled({inner.name},{c})"
        self.is_probability = inner.is_probability and c == 1
        self.total_mass = inner.total_mass.scaled(self.c)
        if inner.total_mass_exact is not None:
            self.total_mass_exact = inner.total_mass_exact * self.c

    def union_lower(self, balls, effort):
        return self.c * self.inner.union_lower(balls, effort)

    def union_upper(self, balls, effort):
        return self.c * self.inner.union_upper(balls, effort)

    def cylinder_mass(self, word: str) -> Fraction:
        return self.c * self.inner.cylinder_mass(word)

    def region_mass(self, region) -> Fraction:
        return self.c * self.inner.region_mass(region)

    def sample_datum(self, rng, index, **kw):
        # sampling draws from the shape of the measure; mass scaling does
        # not change the normalized law
        return self.inner.sample_datum(rng, index, **kw)


class AtomicMeasure(_ExactOracle):
    """Finite atomic measure; bounds are exact via exact membership."""

    def __init__(self, space: SpaceDescriptor, atoms: Sequence[tuple[object, Fraction]],
                 name: str = "atomic"):
        self.space = space
        self.atoms = [(datum, Fraction(w)) for datum, w in atoms]
        if any(w <= 0 for _, w in self.atoms):
            raise ValueError("atom weights must be positive")
        total = sum((w for _, w in self.atoms), Fraction(0))
        self.name = name
        self.is_probability = total == 1
        self.total_mass = ComputableReal.from_fraction(total)
        self.total_mass_exact = total

    def exact_union(self, balls):
        total = Fraction(0)
        for datum, w in self.atoms:
            if any(membership_exact(self.space, datum, b) < 0 for b in balls):
                total += w
        return total


class MixtureMeasure(MeasureOracle):
    """Nonnegative rational combination of oracles on one space."""

    def __init__(self, parts: Sequence[tuple[MeasureOracle, Fraction]], name: str = ""):
        self.parts = [(m, Fraction(w)) for m, w in parts]
        self.space = self.parts[0][0].space
        self.name = name or "+".join(f"{w}*{m.name}" for m, w in self.parts)
        total = self.parts[0][0].total_mass.scaled(self.parts[0][1])
        for m, w in self.parts[1:]:
            total = total + m.total_mass.scaled(w)
        self.total_mass = total
        if all(m.total_mass_exact is not None for m, _ in self.parts):
            self.total_mass_exact = sum(w * m.total_mass_exact
                                        for m, w in self.parts)
        self.is_probability = all(m.is_probability for m, _ in self.parts) \
            and sum(w for _, w in self.parts) == 1

    def union_lower(self, balls, effort):
        return sum(w * m.union_lower(balls, effort) for m, w in self.parts)

    def union_upper(self, balls, effort):
        return sum(w * m.union_upper(balls, effort) for m, w in self.parts)

    def sample_datum(self, rng, index, **kw):
        weights = [w for _, w in self.parts]
        total = sum(weights)
        u = rng.unit_fraction(index, 64) * total
        acc = Fraction(0)
        for (m, w) in self.parts:
            acc += w
            if u < acc:
                return m.sample_datum(rng.substream("mix"), index, **kw)
        return self.parts[-1][0].sample_datum(rng.substream("mix"), index, **kw)


class QuantizedOracle(MeasureOracle):
    """Artificially staircased bounds: exact measure rounded to 2^-effort.

    Exists to exercise effort-convergence paths; the bounds are honest
    (lower <= true <= upper) and converge as effort grows.
    """

    def __init__(self, inner: MeasureOracle):
        self.inner = inner
        self.space = inner.space
        self.name = f"quantized({inner.name})"
        self.is_probability = inner.is_probability
        self.total_mass = inner.total_mass

    def union_lower(self, balls, effort):
        v = self.inner.union_lower(balls, effort)
        grid = 1 << max(0, effort)
        return Fraction((v.numerator * grid) // v.denominator, grid)

    def union_upper(self, balls, effort):
        v = self.inner.union_upper(balls, effort)
        grid = 1 << max(0, effort)
        return Fraction(-((-v.numerator * grid) // v.denominator), grid)


class NormalizedOracle(MeasureOracle):
    """Probability oracle obtained by dividing out the total mass."""

    def __init__(self, inner: MeasureOracle, certified_precision: int):
        self.inner = inner
        self.space = inner.space
        self.name = f"normalized({inner.name})"
        self.is_probability = True
        self.total_mass = ComputableReal.from_int(1)
        self.total_mass_exact = Fraction(1)
        self._prec = certified_precision

    def _mass_bounds(self, effort: int) -> tuple[Fraction, Fraction]:
        prec = max(effort, self._prec)
        lo, hi = self.inner.total_mass_bounds(prec)
        return lo, hi

    def union_lower(self, balls, effort):
        lo_mass, hi_mass = self._mass_bounds(effort)
        return self.inner.union_lower(balls, effort) / hi_mass

    def union_upper(self, balls, effort):
        lo_mass, _ = self._mass_bounds(effort)
        if lo_mass <= 0:
            return Fraction(1)
        return min(Fraction(1), self.inner.union_upper(balls, effort) / lo_mass)

    def sample_datum(self, rng, index, **kw):
        return self.inner.sample_datum(rng, index, **kw)


def normalize(mu: MeasureOracle, threshold_bits: int = 20) -> MeasureOracle:
    """Divide by total mass; fails if mass cannot be certified > 2^-threshold."""
    if mu.is_probability:
        return mu
    threshold = Fraction(1, 1 << threshold_bits)
    for prec in range(2, threshold_bits + 3):
        q = mu.total_mass.approx(prec).as_fraction()
        if q - Fraction(1, 1 << prec) > threshold:
            return NormalizedOracle(mu, prec)
    raise ZeroMassError(
        f"total mass of {mu.name} not certified above 2^-{threshold_bits}")


# ---------------------------------------------------------------------------
# Registry-style constructor

def builtin_measure(name: str) -> MeasureOracle:
    """Measures by name: uniform_cantor, lebesgue_interval, lebesgue_torus2,
    bernoulli(p), scaled(name, c); p and c as rationals like 1/4."""
    name = name.strip()
    if name == "uniform_cantor":
        return CantorMeasure(Fraction(1, 2))
    if name == "lebesgue_interval":
        return LebesgueInterval()
    if name in ("lebesgue_circle", "lebesgue_torus1"):
        return LebesgueTorus(1)
    if name == "lebesgue_torus2":
        return LebesgueTorus(2)
    if name == "lebesgue_torus3":
        return LebesgueTorus(3)
    if name.startswith("bernoulli(") and name.endswith(")"):
        p = Fraction(name[len("bernoulli("):-1])
        return CantorMeasure(p)
    if name.startswith("scaled(") and name.endswith(")"):
        inner_name, c = name[len("scaled("):-1].rsplit(",", 1)
        return ScaledMeasure(builtin_measure(inner_name), Fraction(c))
    raise UnknownMeasureError(f"unknown measure {name!r}")


# ---------------------------------------------------------------------------
# Finite rational measures and the Prokhorov metric

class FiniteRationalMeasure:
    """Measure concentrated on finitely many ideal points, rational weights."""

    def __init__(self, space: SpaceDescriptor, atoms: Sequence[tuple[int, Fraction]]):
        seen = set()
        self.atoms = []
        for idx, w in atoms:
            w = Fraction(w)
            if w <= 0:
                raise ValueError("weights must be positive")
            if idx in seen:
                raise ValueError("atoms must be distinct")
            seen.add(idx)
            self.atoms.append((idx, w))
        self.space = space

    def total(self) -> Fraction:
        return sum((w for _, w in self.atoms), Fraction(0))

    def is_probability(self) -> bool:
        return self.total() == 1

    def as_oracle(self, name: str = "atomic") -> AtomicMeasure:
        return AtomicMeasure(self.space,
                             [(self.space.ideal_point(i), w) for i, w in self.atoms],
                             name=name)


def prokhorov(mu: FiniteRationalMeasure, nu: FiniteRationalMeasure,
              space: SpaceDescriptor, precision: int,
              atom_limit: int = 12) -> Fraction:
    """Prokhorov distance between finite rational probability measures.

    Bisection over epsilon with exact subset checks: feasibility of eps
    means mu(A) <= nu(A^eps) + eps for every A, and subsets of mu's atom
    set suffice.  The returned value is within 2^-precision of the exact
    distance.
    """
    if not (mu.is_probability() and nu.is_probability()):
        raise ValueError("prokhorov is defined for probability measures here")
    if len(mu.atoms) > atom_limit:
        raise UnsupportedError(
            f"{len(mu.atoms)} atoms exceed the subset-enumeration limit {atom_limit}")

    mu_idx = [i for i, _ in mu.atoms]
    mu_w = [w for _, w in mu.atoms]
    nu_idx = [i for i, _ in nu.atoms]
    nu_w = [w for _, w in nu.atoms]
    dist = [[space.ideal_distance_exact(j, i) for i in mu_idx] for j in nu_idx]
    k = len(mu_idx)

    subset_mass = []
    for mask in range(1 << k):
        m = Fraction(0)
        for b in range(k):
            if mask >> b & 1:
                m += mu_w[b]
        subset_mass.append(m)

    def feasible(eps: Fraction) -> bool:
        # nu(A^eps) for every A, sharing the per-atom minimum distances
        for mask in range(1, 1 << k):
            target = subset_mass[mask] - eps
            if target <= 0:
                continue
            covered = Fraction(0)
            ok = False
            for j in range(len(nu_idx)):
                dmin = min(dist[j][b] for b in range(k) if mask >> b & 1)
                if dmin < eps:
                    covered += nu_w[j]
                    if covered >= target:
                        ok = True
                        break
            if not ok and covered < target:
                return False
        return True

    lo, hi = Fraction(0), Fraction(1)
    if feasible(hi) is False:
        # cannot happen for probabilities: mu(A) <= 1 <= nu(A^1) + 1
        return Fraction(1)
    for _ in range(precision + 1):
        mid = (lo + hi) / 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2
