"""Coarse-grained entropy over partitions of disjoint enumerable open sets.

A partition cell's entropy is the code length of its index (conditioned
on the measure's description) plus log2 of its mass.  The stability check
estimates how often the fine-grained entropy of a sample falls more than
m bits below the coarse entropy of its cell, which the theory bounds by a
constant times 2^-m relative to the cell mass; the one-sided entropy
estimator only shrinks the violating set, so observed fractions are
conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .binrep import BOUNDARY, Representation
from .coding import ComplexityApproximator, bits_of_bytes, bits_of_int
from .dyadic import DyadicRational
from .errors import EntropicaError
from .measures import MeasureOracle
from .randomness import entropy_of_code, log2_fraction
from .rng import CounterRng
from .spaces import (EnumerableOpenSet, IdealBall, Membership, Point,
                     SpaceDescriptor, ball_membership, membership_exact)


class ZeroCellError(EntropicaError):
    pass


class OpenPartition:
    """Finite list of pairwise disjoint enumerable open sets.

    The shipped constructors build cells from disjoint dyadic balls, so
    disjointness holds by construction.
    """

    def __init__(self, space: SpaceDescriptor, cells: Sequence[EnumerableOpenSet]):
        self.space = space
        self.cells = list(cells)

    def __len__(self):
        return len(self.cells)

    @classmethod
    def dyadic(cls, space: SpaceDescriptor, level: int,
               group: int = 1) -> "OpenPartition":
        """Partition into dyadic cells at the given level, optionally
        grouping `group` consecutive cells per partition element."""
        balls = space.refinement_cells(level)
        cells = []
        for k in range(0, len(balls), group):
            cells.append(EnumerableOpenSet.from_balls(space, balls[k:k + group]))
        return cls(space, cells)

    def serialize(self) -> str:
        lines = ["entropica-partition v1",
                 f"space={self.space.name} cells={len(self.cells)}"]
        for cell in self.cells:
            parts = []
            for ball in cell.balls_up_to(1 << 16):
                datum = self.space.ideal_point(ball.center)
                if isinstance(datum, tuple):
                    center = ",".join(
                        DyadicRational.from_fraction(c).decimal_str()
                        for c in datum)
                else:
                    center = DyadicRational.from_fraction(Fraction(datum)).decimal_str()
                radius = DyadicRational.from_fraction(ball.radius).decimal_str()
                parts.append(f"({center};{radius})")
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text: str, space: SpaceDescriptor) -> "OpenPartition":
        lines = text.splitlines()
        if not lines or lines[0] != "entropica-partition v1":
            raise ValueError("unrecognized partition header")
        cells = []
        for ln in lines[2:]:
            if not ln.strip():
                continue
            balls = []
            for item in ln.split():
                body = item.strip("()")
                center_s, radius_s = body.split(";")
                if "," in center_s:
                    datum = tuple(Fraction(c) for c in center_s.split(","))
                else:
                    datum = Fraction(center_s)
                balls.append(IdealBall(space.index_of_datum(datum),
                                       Fraction(radius_s)))
            cells.append(EnumerableOpenSet.from_balls(space, balls))
        return cls(space, cells)

    def description_length(self, approx: ComplexityApproximator) -> int:
        """Code length of the canonical serialized description."""
        return approx.code_length(bits_of_bytes(self.serialize().encode()))

    def index_code_length(self, i: int, mu: MeasureOracle,
                          approx: ComplexityApproximator) -> int:
        """K(i | mu): the index against the measure's name string."""
        return approx.code_length(bits_of_int(i),
                                  bits_of_bytes(mu.name.encode()))


@dataclass(frozen=True)
class CoarseEntropy:
    value: float            # K(i|mu) + log2(bracket midpoint of the mass)
    index_code_length: int
    mass_lower: Fraction
    mass_upper: Fraction

    @property
    def bracket_width(self) -> Fraction:
        return self.mass_upper - self.mass_lower


def coarse_entropy(partition: OpenPartition, i: int, mu: MeasureOracle,
                   effort: int, approx: ComplexityApproximator) -> CoarseEntropy:
    if not 0 <= i < len(partition):
        raise IndexError(f"cell index {i} out of range")
    balls = partition.cells[i].balls_up_to(max(4, effort))
    lo = mu.union_lower(balls, effort)
    hi = mu.union_upper(balls, effort)
    if hi <= 0:
        raise ZeroCellError(f"cell {i} has certified zero mass")
    mid = (lo + hi) / 2
    k = partition.index_code_length(i, mu, approx)
    return CoarseEntropy(k + log2_fraction(mid), k, lo, hi)


def cell_of(x: Point, partition: OpenPartition, precision: int,
            effort: int) -> Optional[int]:
    """The unique cell certifying the point inside, or None when unknown."""
    found = None
    for i, cell in enumerate(partition.cells):
        inside = False
        for ball in cell.balls_up_to(max(4, effort)):
            if x.exact_datum is not None:
                if membership_exact(partition.space, x.exact_datum, ball) < 0:
                    inside = True
                    break
            elif ball_membership(partition.space, x, ball, precision) == Membership.INSIDE:
                inside = True
                break
        if inside:
            if found is not None:
                raise EntropicaError(
                    f"cells {found} and {i} both certified: not disjoint")
            found = i
    return found


@dataclass
class StabilityRow:
    m: int
    cell_samples: int
    violations: int
    fraction: float
    stderr: float
    envelope: float
    passed: bool


@dataclass
class StabilityReport:
    cell: int
    coarse: CoarseEntropy
    partition_code_length: int
    envelope_constant: float
    rows: list[StabilityRow]
    abstentions: int


def _sample_entropies(partition: OpenPartition, mu: MeasureOracle,
                      representation: Representation,
                      approx: ComplexityApproximator, samples: int, seed: int,
                      depth: int, precision: int, effort: int):
    """Sample from mu; yield (cell index, fine entropy) pairs."""
    rng = CounterRng(seed, "stability")
    out = []
    abstain = 0
    for idx in range(samples):
        datum = mu.sample_datum(rng, idx)
        pt = Point(partition.space, exact_datum=datum)
        cell = cell_of(pt, partition, precision, effort)
        if cell is None:
            abstain += 1
            continue
        bits = representation.encode(pt, depth, precision)
        if bits is BOUNDARY:
            abstain += 1
            continue
        est = entropy_of_code(bits, representation, approx, depth, effort)
        out.append((cell, est.value))
    return out, abstain


def stability_check(partition: OpenPartition, i: int, mu: MeasureOracle,
                    representation: Representation,
                    approx: ComplexityApproximator, m_max: int, samples: int,
                    seed: int, depth: int = 48, precision: int = 64,
                    effort: int = 16) -> StabilityReport:
    """Empirical check of the coarse-entropy stability bound for cell i.

    Counts samples in the cell whose fine entropy drops below
    coarse_entropy(cell) - K(partition) - m, for m = 0..m_max, against a
    c * 2^-m envelope with c fitted at m = 0 (floored at one observable
    event so the envelope is never vacuously zero).
    """
    pairs, abstain = _sample_entropies(partition, mu, representation, approx,
                                       samples, seed, depth, precision, effort)
    coarse = coarse_entropy(partition, i, mu, effort, approx)
    k_pi = partition.description_length(approx)
    in_cell = [h for c, h in pairs if c == i]
    n_cell = len(in_cell)
    rows = []
    base = coarse.value - k_pi
    fractions = []
    for m in range(m_max + 1):
        viol = sum(1 for h in in_cell if h < base - m)
        frac = viol / n_cell if n_cell else 0.0
        fractions.append(frac)
    c_fit = max(fractions[0], 1.0 / n_cell if n_cell else 1.0)
    for m in range(m_max + 1):
        frac = fractions[m]
        stderr = math.sqrt(max(frac * (1 - frac), 1e-12) / max(n_cell, 1))
        env = c_fit * 2.0 ** (-m)
        rows.append(StabilityRow(m, n_cell, round(frac * n_cell), frac,
                                 stderr, env, frac <= env + 3 * stderr))
    return StabilityReport(i, coarse, k_pi, c_fit, rows, abstain)


@dataclass
class FineCoarseReport:
    samples: int
    abstentions: int
    partition_code_length: int
    per_cell_max_excess: dict[int, float]   # max fine - (coarse + K(Pi))
    max_excess: float


def fine_vs_coarse_check(partition: OpenPartition, mu: MeasureOracle,
                         representation: Representation,
                         approx: ComplexityApproximator, samples: int,
                         seed: int, depth: int = 48, precision: int = 64,
                         effort: int = 16) -> FineCoarseReport:
    """Empirical maximum of fine entropy minus (coarse entropy + K(Pi))."""
    pairs, abstain = _sample_entropies(partition, mu, representation, approx,
                                       samples, seed, depth, precision, effort)
    k_pi = partition.description_length(approx)
    per_cell: dict[int, float] = {}
    for cell, h in pairs:
        coarse = coarse_entropy(partition, cell, mu, effort, approx)
        excess = h - (coarse.value + k_pi)
        if cell not in per_cell or excess > per_cell[cell]:
            per_cell[cell] = excess
    overall = max(per_cell.values()) if per_cell else -math.inf
    return FineCoarseReport(samples, abstain, k_pi, per_cell, overall)
