"""Exact high-precision orbit codes for the flow experiments.

The flow experiments track orbits started at points whose coordinates are
dyadic slices of sqrt(2).  Working with one cached integer approximation
S = floor(sqrt(2) * 2^P) makes every orbit coordinate an exact integer
expression with a known error bound, so digit extraction stays certified:
a digit is emitted only when the integer value sits further from the
dyadic grid than the accumulated error, and ticks that fail the margin
check abstain.

Baker coordinates under the suspension flow reduce to bit slices: after j
steps the expanding coordinate is frac(2^j eta) and the contracting one
holds the last j consumed digits in reverse order followed by the second
base coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

_SQRT2_CACHE: dict[int, int] = {}


def sqrt2_scaled(precision: int) -> int:
    """floor(sqrt(2) * 2^precision)."""
    got = _SQRT2_CACHE.get(precision)
    if got is None:
        got = math.isqrt(2 << (2 * precision))
        _SQRT2_CACHE[precision] = got
    return got


def _digits_from_int(value: int, err: int, precision: int, count: int,
                     exact: bool) -> Optional[str]:
    """Top `count` digits of value/2^precision in [0,1), or None when the
    accumulated error could flip a digit."""
    if count == 0:
        return ""
    head = value >> (precision - count)
    if not exact:
        low = value & ((1 << (precision - count)) - 1)
        span = 1 << (precision - count)
        if low <= err or span - low <= err:
            return None
    return format(head & ((1 << count) - 1), f"0{count}b")


@dataclass
class OrbitCode:
    t: Fraction
    steps: int
    bits: Optional[str]      # None marks an abstention


class SuspensionOrbit:
    """Grid-time codes for the baker-rotation suspension.

    The start point is the representation's base (sqrt(2) slices) plus an
    optional exact dyadic offset per encoded coordinate, so both the
    all-zeros start and typical starts (seeded dyadic offsets) share one
    exact evaluator.
    """

    def __init__(self, speed: int, grid_g: int, depth: int,
                 start_offsets: tuple[Fraction, Fraction] = (Fraction(0), Fraction(0)),
                 guard_bits: int = 160):
        self.speed = speed
        self.grid_g = grid_g
        self.depth = depth
        max_steps = speed + 2
        self.precision = max_steps + depth + guard_bits
        P = self.precision
        s = sqrt2_scaled(P)
        self.h1 = s - (1 << P)        # frac(sqrt 2)
        self.h2 = s >> 1              # sqrt(2)/2
        self.h3 = s >> 2              # sqrt(2)/4
        self.u1 = (start_offsets[0].numerator << P) // start_offsets[0].denominator
        self.u2 = (start_offsets[1].numerator << P) // start_offsets[1].denominator
        self.x0 = (self.h1 + self.u1) & ((1 << P) - 1)
        self.y0 = (self.h2 + self.u2) & ((1 << P) - 1)
        self.window = depth + 96

    def base_fractions(self, bits: int = 128) -> tuple[Fraction, Fraction, Fraction]:
        P = self.precision
        return tuple(Fraction(h >> (P - bits), 1 << bits)
                     for h in (self.h1, self.h2, self.h3))

    def steps_at(self, k: int) -> int:
        """floor(N(t_k + z0)) - floor(N z0) for t_k = k 2^-grid_g."""
        P = self.precision
        n = self.speed
        base = n * self.h3
        t_term = (k * n) << (P - self.grid_g) if P >= self.grid_g else 0
        return ((t_term + base) >> P) - (base >> P)

    def code_at(self, k: int) -> OrbitCode:
        """Interleaved digits of the (x, y) offsets from the base point."""
        P = self.precision
        t = Fraction(k, 1 << self.grid_g)
        j = self.steps_at(k)
        per = [(self.depth + 1) // 2, self.depth // 2]
        if j == 0:
            dx = _digits_from_int(self.u1, 0, P, per[0], exact=True)
            dy = _digits_from_int(self.u2, 0, P, per[1], exact=True)
        else:
            mask = (1 << P) - 1
            # x_j = frac(2^j x0): error of the slice is below 2^(j+1) units
            x_int = ((self.x0 << j) & mask)
            off_x = (x_int - self.h1) & mask
            err_x = (1 << (j + 1)) if j + 1 < P else mask
            dx = _digits_from_int(off_x, err_x, P, per[0], exact=False)
            # y_j: consumed digits of x0 in reverse, then y0's tail
            w = min(j, self.window)
            window_bits = (self.x0 >> (P - j)) & ((1 << w) - 1)
            rev = int(format(window_bits, f"0{w}b")[::-1], 2)
            y_int = rev << (P - w)
            if j < self.window:
                y_int |= (self.y0 >> j) & ((1 << (P - w)) - 1)
                err_y = 4
            else:
                err_y = 1 << (P - w)
            off_y = (y_int - self.h2) & mask
            dy = _digits_from_int(off_y, err_y + 2, P, per[1], exact=False)
        if dx is None or dy is None:
            return OrbitCode(t, j, None)
        bits = []
        cx = cy = 0
        for i in range(self.depth):
            if i % 2 == 0:
                bits.append(dx[cx])
                cx += 1
            else:
                bits.append(dy[cy])
                cy += 1
        return OrbitCode(t, j, "".join(bits))

    def start_code(self, depth: int) -> str:
        """The start point's code: interleaved digits of the start offsets."""
        per = [(depth + 1) // 2, depth // 2]
        dx = _digits_from_int(self.u1, 0, self.precision, per[0], exact=True)
        dy = _digits_from_int(self.u2, 0, self.precision, per[1], exact=True)
        out = []
        cx = cy = 0
        for i in range(depth):
            if i % 2 == 0:
                out.append(dx[cx]); cx += 1
            else:
                out.append(dy[cy]); cy += 1
        return "".join(out)


class RotationOrbit:
    """Grid-time codes for the circle rotation x -> x + t*omega.

    Base point of the representation: frac(sqrt 2).  Start state:
    sqrt(2)/2.  Rotation speed: sqrt(2)/4.  The encoded offset at time t
    is frac((1 - sqrt(2)/2) + t * sqrt(2)/4), irrational at every grid
    time, so digit margins are always positive.
    """

    def __init__(self, grid_g: int, depth: int, guard_bits: int = 160):
        self.grid_g = grid_g
        self.depth = depth
        self.precision = depth + guard_bits
        P = self.precision
        s = sqrt2_scaled(P)
        self.offset0 = ((1 << P) - (s >> 1)) & ((1 << P) - 1)
        self.omega = s >> 2

    def code_at(self, k: int) -> OrbitCode:
        P = self.precision
        mask = (1 << P) - 1
        t = Fraction(k, 1 << self.grid_g)
        shift = (k * self.omega) >> self.grid_g
        off = (self.offset0 + shift) & mask
        err = k + 4
        bits = _digits_from_int(off, err, P, self.depth, exact=False)
        return OrbitCode(t, k, bits)
