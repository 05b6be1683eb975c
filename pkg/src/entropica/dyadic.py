"""Exact dyadic rational arithmetic.

A dyadic rational is mantissa * 2^exponent with an arbitrary-precision
integer mantissa.  All arithmetic here is exact; rounding only happens in
the explicit rounding helpers.  Canonical form keeps the mantissa odd
(zero is stored as 0 * 2^0), so equality is structural.
"""

from __future__ import annotations

from fractions import Fraction


class DyadicRational:
    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int, exponent: int = 0):
        if mantissa == 0:
            exponent = 0
        else:
            # strip trailing zero bits so the representation is canonical
            shift = (mantissa & -mantissa).bit_length() - 1
            if shift:
                mantissa >>= shift
                exponent += shift
        self.mantissa = mantissa
        self.exponent = exponent

    # ---- constructors ----

    @classmethod
    def zero(cls) -> "DyadicRational":
        return cls(0, 0)

    @classmethod
    def one(cls) -> "DyadicRational":
        return cls(1, 0)

    @classmethod
    def pow2(cls, e: int) -> "DyadicRational":
        """2^e."""
        return cls(1, e)

    @classmethod
    def from_fraction(cls, fr: Fraction) -> "DyadicRational":
        den = fr.denominator
        if den & (den - 1):
            raise ValueError(f"{fr} is not dyadic")
        return cls(fr.numerator, -(den.bit_length() - 1))

    # ---- conversions ----

    def as_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent, 1)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def __float__(self) -> float:
        try:
            return self.mantissa * 2.0 ** self.exponent
        except OverflowError:
            return float(self.as_fraction())

    def decimal_str(self) -> str:
        """Exact decimal literal (dyadics always terminate)."""
        m, e = self.mantissa, self.exponent
        if e >= 0:
            return str(m << e)
        sign = "-" if m < 0 else ""
        m = abs(m)
        k = -e
        digits = m * 5 ** k  # m / 2^k == m * 5^k / 10^k
        s = str(digits).rjust(k + 1, "0")
        return f"{sign}{s[:-k]}.{s[-k:]}"

    # ---- arithmetic (exact) ----

    def _aligned(self, other: "DyadicRational"):
        e = min(self.exponent, other.exponent)
        return (self.mantissa << (self.exponent - e),
                other.mantissa << (other.exponent - e), e)

    def __add__(self, other: "DyadicRational") -> "DyadicRational":
        a, b, e = self._aligned(other)
        return DyadicRational(a + b, e)

    def __sub__(self, other: "DyadicRational") -> "DyadicRational":
        a, b, e = self._aligned(other)
        return DyadicRational(a - b, e)

    def __mul__(self, other: "DyadicRational") -> "DyadicRational":
        return DyadicRational(self.mantissa * other.mantissa,
                              self.exponent + other.exponent)

    def __neg__(self) -> "DyadicRational":
        return DyadicRational(-self.mantissa, self.exponent)

    def __abs__(self) -> "DyadicRational":
        return DyadicRational(abs(self.mantissa), self.exponent)

    def shifted(self, k: int) -> "DyadicRational":
        """self * 2^k."""
        return DyadicRational(self.mantissa, self.exponent + k)

    # ---- comparisons (exact) ----

    def _cmp(self, other: "DyadicRational") -> int:
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DyadicRational):
            return NotImplemented
        return self.mantissa == other.mantissa and self.exponent == other.exponent

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.mantissa, self.exponent))

    def is_zero(self) -> bool:
        return self.mantissa == 0

    # ---- rounding ----

    def round_to(self, n: int) -> "DyadicRational":
        """Nearest multiple of 2^-n (ties toward +inf); error <= 2^-(n+1)."""
        if self.exponent >= -n:
            return self
        shift = -n - self.exponent
        m = (self.mantissa + (1 << (shift - 1))) >> shift
        return DyadicRational(m, -n)

    def floor(self) -> int:
        if self.exponent >= 0:
            return self.mantissa << self.exponent
        return self.mantissa >> -self.exponent

    def frac_part(self) -> "DyadicRational":
        """self mod 1, in [0, 1)."""
        return self - DyadicRational(self.floor(), 0)

    def __repr__(self):
        return f"DyadicRational({self.mantissa}, {self.exponent})"

    def __str__(self):
        return self.decimal_str()


ZERO = DyadicRational(0, 0)
ONE = DyadicRational(1, 0)


def dyadic(value, exponent: int | None = None) -> DyadicRational:
    """Convenience constructor: dyadic(m, e), dyadic(int) or dyadic(Fraction)."""
    if exponent is not None:
        return DyadicRational(value, exponent)
    if isinstance(value, DyadicRational):
        return value
    if isinstance(value, int):
        return DyadicRational(value, 0)
    if isinstance(value, Fraction):
        return DyadicRational.from_fraction(value)
    raise TypeError(f"cannot make a dyadic from {value!r}")
