"""Deficiency-of-randomness and algorithmic entropy estimates.

The deficiency of a bit string against a cylinder measure is the maximum
over prefixes of (-code_length(prefix) - log2 upper_mass(prefix)).  Code
lengths come from a Kraft-satisfying approximator, so the estimate is
one-sided: it never overstates the ideal deficiency by more than the
approximator's additive constant, and the Markov tail bound
mu{deficiency >= k} <= 2^-k holds exactly.

Entropy is the negated deficiency of the encoded point against the
representation's cylinder measure; for non-probability measures its
natural ceiling is log2 of the total mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .binrep import BOUNDARY, BinaryRepresentation, CylinderMeasure, \
    DigitRepresentation
from .coding import ComplexityApproximator
from .errors import BoundaryPointError
from .measures import CantorMeasure, MeasureOracle, ScaledMeasure
from .spaces import Point

MeasureLike = Union[CylinderMeasure, MeasureOracle, BinaryRepresentation,
                    DigitRepresentation]


def log2_fraction(fr: Fraction) -> float:
    """log2 of a positive rational, safe for huge numerators/denominators."""
    if fr <= 0:
        raise ValueError("log2 of a nonpositive value")
    num, den = fr.numerator, fr.denominator
    sn = max(0, num.bit_length() - 53)
    sd = max(0, den.bit_length() - 53)
    return (math.log2(num >> sn) + sn) - (math.log2(den >> sd) + sd)


@dataclass(frozen=True)
class DeficiencyEstimate:
    value: float              # bits; may be negative, +inf on a zero cylinder
    depth: int
    argmax_prefix_length: int
    approximator: str

    def exceeds(self, k: float) -> bool:
        return self.value > k


@dataclass(frozen=True)
class EntropyEstimate:
    value: float              # bits, = -deficiency
    depth: int
    representation: str
    deficiency: DeficiencyEstimate


def _as_cylinders(mu: MeasureLike) -> CylinderMeasure:
    if isinstance(mu, CylinderMeasure):
        return mu
    return CylinderMeasure(mu)


def neglog2_upper_prefix_masses(cyl: CylinderMeasure, bits: str,
                                effort: int) -> list[float]:
    """-log2 of the upper cylinder-mass bound for every prefix of bits.

    index n of the result corresponds to bits[:n]; +inf marks prefixes
    whose mass upper bound is certified zero.  Exact product measures take
    a cumulative fast path.
    """
    n = len(bits)
    src = cyl.source

    scale = 0.0
    inner = src
    if isinstance(src, ScaledMeasure):
        scale = -log2_fraction(src.c)
        inner = src.inner

    if isinstance(inner, CantorMeasure):
        l1 = -log2_fraction(inner.p)
        l0 = -log2_fraction(1 - inner.p)
        out = [scale]
        acc = scale
        for ch in bits:
            acc += l1 if ch == "1" else l0
            out.append(acc)
        return out

    if isinstance(src, DigitRepresentation) and src.dim:
        _, hi = src.mu.total_mass_bounds(effort + 8)
        base = -log2_fraction(hi)
        return [base + k for k in range(n + 1)]

    if isinstance(src, DigitRepresentation):
        # cantor digit representation: defer to its exact cylinder masses
        inner2 = src.mu
        return neglog2_upper_prefix_masses(CylinderMeasure(inner2), bits, effort)

    out = []
    for k in range(n + 1):
        hi = cyl.upper(bits[:k], effort)
        out.append(math.inf if hi <= 0 else -log2_fraction(hi))
    return out


def deficiency(alpha_prefix: str, mu: MeasureLike,
               approx: ComplexityApproximator, depth: int, effort: int,
               condition: Optional[str] = None) -> DeficiencyEstimate:
    """max over 1 <= n <= depth of (-K(alpha[:n]) - log2 mu_upper(alpha[:n]))."""
    if depth > len(alpha_prefix):
        raise ValueError("depth exceeds the available prefix")
    cyl = _as_cylinders(mu)
    bits = alpha_prefix[:depth]
    lengths = approx.prefix_code_lengths(bits, condition)
    neglogs = neglog2_upper_prefix_masses(cyl, bits, effort)
    best = -math.inf
    best_n = 0
    for n in range(1, depth + 1):
        if neglogs[n] == math.inf:
            return DeficiencyEstimate(math.inf, depth, n, approx.name)
        v = neglogs[n] - lengths[n]
        if v > best:
            best = v
            best_n = n
    return DeficiencyEstimate(best, depth, best_n, approx.name)


def entropy(x: Point, representation: Union[BinaryRepresentation, DigitRepresentation],
            approx: ComplexityApproximator, depth: int, precision: int,
            effort: int, condition: Optional[str] = None) -> EntropyEstimate:
    """Algorithmic entropy of a point through a representation: -deficiency
    of its code against the pushforward cylinder measure."""
    bits = representation.encode(x, depth, precision)
    if bits is BOUNDARY:
        raise BoundaryPointError(
            "point could not be encoded at the requested precision")
    return entropy_of_code(bits, representation, approx, depth, effort, condition)


def entropy_of_code(bits: str,
                    representation: Union[BinaryRepresentation, DigitRepresentation],
                    approx: ComplexityApproximator, depth: int, effort: int,
                    condition: Optional[str] = None) -> EntropyEstimate:
    d = deficiency(bits, representation, approx, min(depth, len(bits)), effort,
                   condition)
    name = type(representation).__name__
    return EntropyEstimate(-d.value, d.depth, name, d)
