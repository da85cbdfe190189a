"""Extremality analysis: necessary and sufficient condition checkers.

Necessary side: a copula with a nontrivial absolutely continuous part is
never an extreme point of the copula set.  The constructive form used here
finds a grid-aligned square in which the density's zero set fills less than
a quarter of the volume, then splits the density into two distinct copula
densities averaging back to the input (``lemma_decompose``).  The witness is
exact: ``(h1 + h2)/2`` equals the input in rational arithmetic.

Sufficient side: if the support can be covered by axis slabs on each of
which it is the graph of a function over that axis, the copula is the
unique one on its support, hence extreme.  ``functional_cover_check``
certifies this with per-axis unions of dyadic intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DecompositionError, DomainError
from .measures import GridDensity, GridSpec, MixedMeasure, SegmentMeasure
from .rationals import (
    ONE,
    ZERO,
    RationalLike,
    intersect_interval_sets,
    normalize_intervals,
    to_fraction,
    total_length,
)

NOT_EXTREME = "NOT_EXTREME"
NECESSARY_CONDITION_PASSED = "NECESSARY_CONDITION_PASSED"

_MAX_REFINE_STEPS = 24

_min2 = np.frompyfunc(min, 2, 1)


@dataclass(frozen=True)
class SquareRegion:
    """Axis-aligned cube ``prod [corner_i, corner_i + edge]`` in [0,1]^n."""

    corner: tuple
    edge: Fraction

    def __post_init__(self):
        corner = tuple(to_fraction(c) for c in self.corner)
        edge = to_fraction(self.edge)
        if edge <= 0:
            raise DomainError("square edge must be positive")
        if any(c < 0 or c + edge > 1 for c in corner):
            raise DomainError("square must lie inside the unit cube")
        object.__setattr__(self, "corner", corner)
        object.__setattr__(self, "edge", edge)

    @property
    def n(self) -> int:
        return len(self.corner)


def _align_to_grid(density: GridDensity, square: SquareRegion):
    """Refine the grid until the square is cell-aligned with an even edge.

    Returns ``(refined_density, corner_indices, half_cells)`` where the
    square spans ``2 * half_cells`` refined cells per axis.
    """
    if square.n != density.n:
        raise DomainError("square and density dimensions differ")
    m = density.spec.m
    factor = 1
    for _ in range(_MAX_REFINE_STEPS):
        mm = m * factor
        cells = square.edge * mm
        aligned = (
            cells.denominator == 1
            and cells.numerator % 2 == 0
            and all((c * mm).denominator == 1 for c in square.corner)
        )
        if aligned:
            refined = density if factor == 1 else density.refine(factor)
            corner_idx = tuple(int(c * mm) for c in square.corner)
            return refined, corner_idx, cells.numerator // 2
        factor *= 2
    raise DomainError("square cannot be aligned to a dyadic grid refinement")


def _square_zero_fraction(density: GridDensity, square: SquareRegion) -> Fraction:
    refined, corner, half = _align_to_grid(density, square)
    window = tuple(slice(c, c + 2 * half) for c in corner)
    zeros = int((refined.values[window] == 0).sum())
    return Fraction(zeros, (2 * half) ** refined.n)


def find_dense_square(density: GridDensity, scales: Sequence[RationalLike]) -> SquareRegion | None:
    """First grid-aligned square whose zero-density volume fraction is < 1/4.

    Scales are tried in the given order (coarse to fine by convention) and
    corners scan lexicographically, so the result is deterministic.  The
    grid is refined dyadically whenever a scale needs an even cell count.
    Returns ``None`` when no square at any scale qualifies.
    """
    n = density.n
    quarter = Fraction(1, 4)
    for raw in scales:
        edge = to_fraction(raw)
        if not (ZERO < edge <= ONE):
            raise DomainError("scales must lie in (0, 1]")
        probe = SquareRegion((ZERO,) * n, edge)
        refined, _, half = _align_to_grid(density, probe)
        mm = refined.spec.m
        size = 2 * half
        zeros = (refined.values == 0).astype(np.int64)
        for corner in np.ndindex(*(mm - size + 1,) * n):
            window = tuple(slice(c, c + size) for c in corner)
            frac = Fraction(int(zeros[window].sum()), size ** n)
            if frac < quarter:
                return SquareRegion(
                    tuple(Fraction(c, mm) for c in corner), edge
                )
    return None


@dataclass(frozen=True)
class DecompositionWitness:
    """Two copula densities with ``(h1 + h2)/2`` equal to the input exactly."""

    h1: GridDensity
    h2: GridDensity
    g: np.ndarray
    square: SquareRegion
    refined_input: GridDensity
    zero_fraction: Fraction


def lemma_decompose(density: GridDensity, square: SquareRegion) -> DecompositionWitness:
    """Split a copula density into two distinct halves inside a dense square.

    Within the square the quarter-square perturbation ``g`` is the cellwise
    minimum of the four quadrant translates of the density (quadrants taken
    in the first two axes, full edge in the rest).  Adding ``g`` with a
    checkerboard sign pattern keeps both halves non-negative and leaves all
    axis slab integrals unchanged, so both halves are copula densities.

    The construction needs the zero set of the density to fill less than a
    quarter of the square; otherwise ``g`` could vanish identically and a
    :class:`DecompositionError` is raised with the measured fraction.
    """
    refined, corner, half = _align_to_grid(density, square)
    n = refined.n
    window = tuple(slice(c, c + 2 * half) for c in corner)
    zeros = int((refined.values[window] == 0).sum())
    zero_fraction = Fraction(zeros, (2 * half) ** n)
    if zero_fraction >= Fraction(1, 4):
        raise DecompositionError(
            f"zero set fills {zero_fraction} of the square (needs < 1/4)",
            zero_fraction=zero_fraction,
        )

    def quadrant(lo0: bool, lo1: bool):
        sl = [
            slice(corner[0] + (0 if lo0 else half), corner[0] + (half if lo0 else 2 * half)),
            slice(corner[1] + (0 if lo1 else half), corner[1] + (half if lo1 else 2 * half)),
        ]
        sl.extend(slice(corner[k], corner[k] + 2 * half) for k in range(2, n))
        return tuple(sl)

    q_ll, q_hl = quadrant(True, True), quadrant(False, True)
    q_lh, q_hh = quadrant(True, False), quadrant(False, False)
    vals = refined.values
    g = _min2(_min2(vals[q_ll], vals[q_hl]), _min2(vals[q_lh], vals[q_hh]))
    if not (g != 0).any():
        raise DecompositionError(
            "perturbation vanished identically despite dense square",
            zero_fraction=zero_fraction,
        )

    h1 = np.array(vals, dtype=object)
    h2 = np.array(vals, dtype=object)
    for sl, sign in ((q_ll, -1), (q_hl, 1), (q_lh, 1), (q_hh, -1)):
        h1[sl] = h1[sl] + sign * g
        h2[sl] = h2[sl] - sign * g
    spec = GridSpec(n, refined.spec.m)
    return DecompositionWitness(
        h1=GridDensity(spec, h1),
        h2=GridDensity(spec, h2),
        g=g,
        square=square,
        refined_input=refined,
        zero_fraction=zero_fraction,
    )


@dataclass(frozen=True)
class SingularityVerdict:
    status: str
    witness: DecompositionWitness | None = None
    halves: tuple | None = None

    @property
    def not_extreme(self) -> bool:
        return self.status == NOT_EXTREME


def singularity_diagnostic(measure, min_edge: RationalLike | None = None) -> SingularityVerdict:
    """Necessary-condition check: an absolutely continuous part is fatal.

    For a measure with a density component, grid-aligned dyadic squares are
    scanned coarse-to-fine down to ``min_edge`` (default: one original cell,
    i.e. two cells after one dyadic refinement).  On success the verdict is
    ``NOT_EXTREME`` together with the decomposition witness and the two
    mixed halves (the singular part rides along unchanged).  Purely singular
    input yields ``NECESSARY_CONDITION_PASSED``; the condition is necessary
    only, so extremality remains undecided.
    """
    if isinstance(measure, SegmentMeasure):
        measure = MixedMeasure.from_singular(measure)
    elif isinstance(measure, GridDensity):
        measure = MixedMeasure.from_density(measure)
    if not isinstance(measure, MixedMeasure):
        raise DomainError(f"cannot analyze {type(measure).__name__}")

    if measure.ac_weight == 0:
        return SingularityVerdict(status=NECESSARY_CONDITION_PASSED)

    density = measure.density
    floor = to_fraction(min_edge) if min_edge is not None else Fraction(1, density.spec.m)
    scales = []
    edge = ONE
    while edge >= floor:
        scales.append(edge)
        edge /= 2
    if not scales:
        raise DomainError("min_edge exceeds the unit cube")
    square = find_dense_square(density, scales)
    if square is None:
        raise DecompositionError(
            f"no dense square found at dyadic edges down to {floor}; "
            "lower min_edge to search finer scales"
        )
    witness = lemma_decompose(density, square)
    halves = tuple(
        MixedMeasure(measure.ac_weight, h, measure.singular)
        for h in (witness.h1, witness.h2)
    )
    return SingularityVerdict(status=NOT_EXTREME, witness=witness, halves=halves)


# ---------------------------------------------------------------------------
# Sufficient condition: functional covers
# ---------------------------------------------------------------------------

def _as_interval_set(intervals) -> list:
    if intervals and isinstance(intervals[0], (int, float, str, Fraction)):
        intervals = [intervals]
    return normalize_intervals(intervals)


def _contains_half_open(intervals, p: Fraction) -> bool:
    for lo, hi in intervals:
        if lo <= p < hi or (hi == ONE and p == ONE):
            return True
    return False


def _coords_at(segment, axis: int, x: Fraction) -> tuple:
    t = (x - segment.a[axis]) / (segment.b[axis] - segment.a[axis])
    return tuple(a + t * (b - a) for a, b in zip(segment.a, segment.b))


def is_functional_over(measure: SegmentMeasure, axis: int, intervals) -> bool:
    """True iff inside the slab ``axis in B`` every fiber meets the support
    in at most one point.

    Decided exactly: a segment orthogonal to the axis whose projection point
    lies in B fails immediately; two segments conflict iff their axis
    projections overlap within B on positive length and their affine
    parameterizations differ on that overlap.
    """
    if not 0 <= axis < measure.n:
        raise DomainError("axis out of range")
    target = _as_interval_set(intervals)
    if not target:
        return True

    flats = []
    sloped = []
    for seg in measure.segments:
        if seg.a[axis] == seg.b[axis]:
            flats.append(seg)
        else:
            lo, hi = sorted((seg.a[axis], seg.b[axis]))
            sloped.append((lo, hi, seg))
    for seg in flats:
        if _contains_half_open(target, seg.a[axis]):
            return False

    sloped.sort(key=lambda item: (item[0], item[1]))
    for i, (lo_i, hi_i, seg_i) in enumerate(sloped):
        for lo_j, hi_j, seg_j in sloped[i + 1:]:
            if lo_j >= hi_i:
                break
            o_lo, o_hi = lo_j, min(hi_i, hi_j)
            if o_hi <= o_lo:
                continue
            if total_length(intersect_interval_sets([(o_lo, o_hi)], target)) == 0:
                continue
            same = _coords_at(seg_i, axis, o_lo) == _coords_at(seg_j, axis, o_lo) \
                and _coords_at(seg_i, axis, o_hi) == _coords_at(seg_j, axis, o_hi)
            if not same:
                return False
    return True


@dataclass(frozen=True)
class FunctionalCoverCertificate:
    """Per-axis slab unions over which the support is a graph.

    ``covered=True`` certifies the sufficient condition: the slabs jointly
    cover the support, so the copula is the unique one on it and extreme.
    """

    axis_intervals: tuple
    covered: bool
    resolution: int


def functional_cover_check(measure: SegmentMeasure, r: int) -> FunctionalCoverCertificate:
    """Greedy sufficient-condition certificate at dyadic resolution r.

    For each axis, ``B_axis`` collects the maximal union of intervals
    ``[j/r, (j+1)/r)`` over which the support is functional; the support is
    covered when every segment's parameter range is exhausted by the slabs
    (boundary points are assessed via interval closures).
    """
    if r < 1 or (r & (r - 1)) != 0:
        raise DomainError("resolution must be a power of two")
    axis_sets = []
    for axis in range(measure.n):
        passing = [
            (Fraction(j, r), Fraction(j + 1, r))
            for j in range(r)
            if is_functional_over(measure, axis, [(Fraction(j, r), Fraction(j + 1, r))])
        ]
        axis_sets.append(tuple(normalize_intervals(passing)))

    covered = True
    for seg in measure.segments:
        hit = []
        for axis in range(measure.n):
            d = seg.b[axis] - seg.a[axis]
            if d == 0:
                p = seg.a[axis]
                if any(lo <= p <= hi for lo, hi in axis_sets[axis]):
                    hit = [(ZERO, ONE)]
                    break
                continue
            for lo, hi in axis_sets[axis]:
                t0, t1 = sorted(((lo - seg.a[axis]) / d, (hi - seg.a[axis]) / d))
                t0, t1 = max(t0, ZERO), min(t1, ONE)
                if t1 > t0:
                    hit.append((t0, t1))
        if total_length(normalize_intervals(hit)) < 1:
            covered = False
            break
    return FunctionalCoverCertificate(
        axis_intervals=tuple(axis_sets), covered=covered, resolution=r
    )
