"""Computable reals as on-demand dyadic approximation oracles.

A ComputableReal wraps an approximator f(n) -> DyadicRational with the
fast Cauchy contract |x - f(n)| <= 2^-n.  Approximations are memoized and
cross-checked: any two cached values q_n, q_m must satisfy
|q_n - q_m| <= 2^-n + 2^-m, otherwise the approximator is broken and
ConsistencyViolation is raised.
"""

from __future__ import annotations

import enum
import math
import threading
from fractions import Fraction
from typing import Callable

from .dyadic import DyadicRational, dyadic
from .errors import ConsistencyViolation


class Comparison(enum.Enum):
    LESS = -1
    INDISTINGUISHABLE = 0
    GREATER = 1


class ComputableReal:
    """A real number given by a deterministic dyadic approximation oracle."""

    __slots__ = ("_approximator", "_cache", "_lock", "name")

    def __init__(self, approximator: Callable[[int], DyadicRational], name: str = ""):
        self._approximator = approximator
        self._cache: dict[int, DyadicRational] = {}
        self._lock = threading.Lock()
        self.name = name

    # ---- constructors ----

    @classmethod
    def from_dyadic(cls, d: DyadicRational) -> "ComputableReal":
        return cls(lambda n: d, name=str(d))

    @classmethod
    def from_int(cls, k: int) -> "ComputableReal":
        return cls.from_dyadic(dyadic(k))

    @classmethod
    def from_fraction(cls, fr: Fraction) -> "ComputableReal":
        def approx(n: int) -> DyadicRational:
            # round(fr * 2^n) / 2^n, error <= 2^-(n+1)
            num = fr.numerator << n if n >= 0 else fr.numerator >> -n
            m = (2 * num + fr.denominator) // (2 * fr.denominator)
            return DyadicRational(m, -n)

        return cls(approx, name=str(fr))

    @classmethod
    def sqrt_of_fraction(cls, fr: Fraction) -> "ComputableReal":
        """sqrt(fr) for fr >= 0, via integer square roots."""
        if fr < 0:
            raise ValueError("negative radicand")
        num, den = fr.numerator, fr.denominator

        def approx(n: int) -> DyadicRational:
            # isqrt(num * 4^(n+1) / den) / 2^(n+1): floor error < 2^-(n+1),
            # plus the denominator floor keeps total error <= 2^-n.
            shift = 2 * (n + 1)
            m = math.isqrt((num << shift) // den)
            return DyadicRational(m, -(n + 1))

        return cls(approx, name=f"sqrt({fr})")

    # ---- core ----

    def approx(self, n: int) -> DyadicRational:
        """Dyadic q with |x - q| <= 2^-n; identical on repeated calls."""
        if n < 0:
            raise ValueError("precision must be >= 0")
        cached = self._cache.get(n)
        if cached is not None:
            return cached
        q = self._approximator(n)
        with self._lock:
            for m, qm in self._cache.items():
                tol = DyadicRational(1, -n) + DyadicRational(1, -m)
                if abs(q - qm) > tol:
                    raise ConsistencyViolation(
                        f"approx({self.name or 'x'}) at {n} -> {q} contradicts "
                        f"cached value {qm} at {m}")
            self._cache[n] = q
        return q

    def as_float(self, n: int = 53) -> float:
        return float(self.approx(n))

    # ---- arithmetic (lazy) ----

    def __add__(self, other: "ComputableReal") -> "ComputableReal":
        return ComputableReal(lambda n: self.approx(n + 2) + other.approx(n + 2))

    def __sub__(self, other: "ComputableReal") -> "ComputableReal":
        return ComputableReal(lambda n: self.approx(n + 2) - other.approx(n + 2))

    def __neg__(self) -> "ComputableReal":
        return ComputableReal(lambda n: -self.approx(n))

    def __mul__(self, other: "ComputableReal") -> "ComputableReal":
        def approx(n: int) -> DyadicRational:
            # magnitude bounds from coarse approximations: |x| <= |q0| + 1 < 2^bx
            bx = _magnitude_bits(self.approx(0))
            by = _magnitude_bits(other.approx(0))
            k = n + 2 + max(bx, by)
            return self.approx(k) * other.approx(k)

        return ComputableReal(approx)

    def scaled(self, c: Fraction) -> "ComputableReal":
        """Multiplication by an exact rational constant."""
        if c == 0:
            return ComputableReal.from_int(0)
        shift = max(0, (abs(c.numerator) // c.denominator + 2).bit_length())

        def approx(n: int) -> DyadicRational:
            q = self.approx(n + 1 + shift).as_fraction() * c
            # round to the grid so the result is dyadic
            num = q.numerator << (n + 1) if n >= -1 else 0
            m = (2 * num + q.denominator) // (2 * q.denominator)
            return DyadicRational(m, -(n + 1))

        return ComputableReal(approx)

    def frac_part(self) -> "ComputableReal":
        """self mod 1 for values certified away from integers.

        Sound only when the caller knows the value is not an exact integer
        boundary; used by rotation dynamics where offsets are irrational or
        handled exactly elsewhere.
        """
        def approx(n: int) -> DyadicRational:
            return self.approx(n).frac_part()

        return ComputableReal(approx)


def _magnitude_bits(q: DyadicRational) -> int:
    # ceil(log2(|q| + 2)): crude upper bound on log2 of the true magnitude + 1
    f = abs(q.as_fraction()) + 2
    return (f.numerator // f.denominator + 1).bit_length()


def compare_apart(x: ComputableReal, y: ComputableReal, n: int) -> Comparison:
    """Three-valued comparison, sound whenever decisive.

    Returns LESS/GREATER only when the approximations certify that the
    values differ; the decision threshold 2^-(n-1) covers the worst-case
    error of both operands.
    """
    qx = x.approx(n)
    qy = y.approx(n)
    gap = DyadicRational(1, -n + 1)
    diff = qx - qy
    if diff > gap:
        return Comparison.GREATER
    if (-diff) > gap:
        return Comparison.LESS
    return Comparison.INDISTINGUISHABLE


def sqrt2_minus_1() -> ComputableReal:
    """The stock irrational used by rotations and representation offsets."""
    root2 = ComputableReal.sqrt_of_fraction(Fraction(2))
    return ComputableReal(lambda n: root2.approx(n) - dyadic(1), name="sqrt2-1")
