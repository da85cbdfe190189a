"""Constructions of singular copulas supported on unions of segments.

Every constructor returns an exact :class:`~extremal_copulas.measures.SegmentMeasure`
(or a graph-backed model) whose uniform marginals hold with zero tolerance:

* ``tent_copula``   -- two segments meeting at ``(t, 1, ..., 1)``.
* ``shuffle_copula`` -- one interior diagonal per axis-0 slab of a partition.
* ``permutation_copula`` -- mass 1/m on one interior diagonal of each cell
  ``(i, sigma_2(i), ..., sigma_n(i))`` of the m-grid.
* ``four_line_3d``  -- the classic four-segment copula in dimension 3 whose
  support is not a graph over any single axis.
* ``shift_transform`` / ``swap_transform`` -- rearrangements of the cube
  that preserve copula-ness (and extremality) exactly.
* ``graph_copula``  -- the unique copula supported on the graph of a
  piecewise-linear map that preserves Lebesgue measure in each coordinate.

Orientations pick one of the ``2**(n-1)`` interior diagonals of a box; the
first axis is canonically oriented ``+`` since a diagonal and its reversal
coincide as point sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, NotMeasurePreservingError
from .measures import Copula, Segment, SegmentMeasure
from .rationals import (
    ONE,
    ZERO,
    RationalLike,
    fraction_tuple,
    intersect_interval_sets,
    normalize_intervals,
    to_fraction,
    total_length,
)

MP_CHECK_TOL = Fraction(1, 10**12)


# ---------------------------------------------------------------------------
# Orientations
# ---------------------------------------------------------------------------

def normalize_orientation(orientation, n: int) -> tuple:
    """Canonical sign tuple of length n with the first entry fixed to +1.

    Accepts sign strings like ``"+-"`` (axes after the first) or ``"++-"``
    (all axes), and integer sequences of either length.
    """
    if orientation is None:
        return (1,) * n
    if isinstance(orientation, str):
        signs = []
        for ch in orientation:
            if ch == "+":
                signs.append(1)
            elif ch == "-":
                signs.append(-1)
            else:
                raise DomainError(f"orientation characters must be +/-, got {ch!r}")
    else:
        signs = [int(s) for s in orientation]
        if any(s not in (1, -1) for s in signs):
            raise DomainError("orientation entries must be +1 or -1")
    if len(signs) == n - 1:
        signs = [1] + signs
    if len(signs) != n:
        raise DomainError(f"orientation needs {n - 1} or {n} signs, got {len(signs)}")
    if signs[0] != 1:
        raise DomainError("first axis orientation is fixed to +1")
    return tuple(signs)


def _diagonal_endpoints(corner, edges, orientation):
    start = tuple(
        c if s > 0 else c + e for c, e, s in zip(corner, edges, orientation)
    )
    end = tuple(
        c + e if s > 0 else c for c, e, s in zip(corner, edges, orientation)
    )
    return start, end


# ---------------------------------------------------------------------------
# Segment-supported families
# ---------------------------------------------------------------------------

def tent_copula(t: RationalLike, n: int = 2) -> SegmentMeasure:
    """Two-segment copula: ``(0,...,0) -> (t,1,...,1) -> (1,0,...,0)``.

    The first segment carries weight t, the second 1-t; the support is a
    graph over axis 0, so each parameter t yields a distinct extreme copula.
    """
    t = to_fraction(t)
    if not (ZERO < t < ONE):
        raise DomainError("tent parameter must lie strictly inside (0, 1)")
    peak = (t,) + (ONE,) * (n - 1)
    return SegmentMeasure([
        Segment((ZERO,) * n, peak, t),
        Segment(peak, (ONE,) + (ZERO,) * (n - 1), 1 - t),
    ])


def shuffle_copula(breaks: Sequence[RationalLike], orientations=None,
                   n: int = 2) -> SegmentMeasure:
    """One interior diagonal per slab ``[t_i, t_{i+1}] x [0,1]^{n-1}``.

    ``breaks`` must be strictly increasing from 0 to 1; block i receives
    weight ``t_{i+1} - t_i``.  ``orientations`` may give one sign choice per
    block (default: all ``+``, which at a single block reproduces the
    comonotone copula).
    """
    bs = fraction_tuple(breaks)
    if len(bs) < 2 or bs[0] != 0 or bs[-1] != 1:
        raise DomainError("breaks must run from 0 to 1")
    if any(x1 <= x0 for x0, x1 in zip(bs, bs[1:])):
        raise DomainError("breaks must be strictly increasing")
    blocks = len(bs) - 1
    if orientations is None:
        orients = [(1,) * n] * blocks
    else:
        orients = [normalize_orientation(o, n) for o in orientations]
        if len(orients) != blocks:
            raise DomainError(f"need {blocks} orientations, got {len(orients)}")
    segments = []
    for i in range(blocks):
        corner = (bs[i],) + (ZERO,) * (n - 1)
        edges = (bs[i + 1] - bs[i],) + (ONE,) * (n - 1)
        start, end = _diagonal_endpoints(corner, edges, orients[i])
        segments.append(Segment(start, end, bs[i + 1] - bs[i]))
    return SegmentMeasure(segments)


def shuffle_copula_truncated(ts: Iterable[RationalLike], limit: RationalLike,
                             tail_tol: RationalLike = Fraction(1, 10**6),
                             orientation=None, n: int = 2) -> SegmentMeasure:
    """Shuffle over a (possibly infinite) nondecreasing break sequence.

    Consumes terms of ``ts`` (starting at 0, nondecreasing, converging to
    ``limit`` <= 1) until the remaining gap drops below ``tail_tol``; the
    tail and the final slab ``[limit, 1]`` are lumped into one closing
    diagonal block.  Exact whenever the sequence actually reaches ``limit``.
    """
    limit = to_fraction(limit)
    tail_tol = to_fraction(tail_tol)
    if not (ZERO < limit <= ONE):
        raise DomainError("limit must lie in (0, 1]")
    consumed = []
    prev = None
    for raw in ts:
        t = to_fraction(raw)
        if prev is not None and t < prev:
            raise DomainError("break sequence must be nondecreasing")
        if t > limit:
            raise DomainError("break sequence exceeds its limit")
        if prev is None and t != 0:
            raise DomainError("break sequence must start at 0")
        if prev is None or t > prev:
            consumed.append(t)
        prev = t
        if limit - t <= tail_tol:
            break
    if not consumed:
        raise DomainError("empty break sequence")
    breaks = consumed + [ONE]
    orients = None
    if orientation is not None:
        orients = [orientation] * (len(breaks) - 1)
    return shuffle_copula(breaks, orients, n=n)


@dataclass(frozen=True)
class PermutationCopulaSpec:
    """Order m, permutations for axes 1..n-1, optional per-cell orientations."""

    m: int
    perms: tuple
    orientations: tuple | None = None

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("permutation copula order must be >= 1")
        perms = tuple(tuple(int(v) for v in p) for p in self.perms)
        if not perms:
            raise DomainError("need at least one permutation (dimension >= 2)")
        for p in perms:
            if sorted(p) != list(range(self.m)):
                raise DomainError(f"{p} is not a permutation of 0..{self.m - 1}")
        object.__setattr__(self, "perms", perms)
        n = len(perms) + 1
        if self.orientations is not None:
            orients = tuple(normalize_orientation(o, n) for o in self.orientations)
            if len(orients) != self.m:
                raise DomainError(f"need {self.m} per-cell orientations")
            object.__setattr__(self, "orientations", orients)

    @property
    def n(self) -> int:
        return len(self.perms) + 1

    def cell(self, i: int) -> tuple:
        return (i,) + tuple(p[i] for p in self.perms)

    def cell_orientation(self, i: int) -> tuple:
        if self.orientations is None:
            return (1,) * self.n
        return self.orientations[i]


def permutation_copula(spec: PermutationCopulaSpec) -> SegmentMeasure:
    """Mass 1/m on an interior diagonal of each cell ``(i, sigma_k(i))``."""
    m = spec.m
    edge = Fraction(1, m)
    segments = []
    for i in range(m):
        corner = tuple(Fraction(c, m) for c in spec.cell(i))
        start, end = _diagonal_endpoints(
            corner, (edge,) * spec.n, spec.cell_orientation(i)
        )
        segments.append(Segment(start, end, edge))
    return SegmentMeasure(segments)


def four_line_3d() -> SegmentMeasure:
    """Four-segment 3-d copula whose support is a graph over no single axis.

    Each segment carries weight 1/4 (required for total mass one and for
    uniform marginals).  Its marginals are uniform, yet for every axis two
    of the segments share the same projection interval while differing on
    it, so no graph-cover certificate exists.
    """
    h = Fraction(1, 2)
    w = Fraction(1, 4)
    return SegmentMeasure([
        Segment((ZERO, ZERO, h), (h, h, ONE), w),
        Segment((h, h, h), (ONE, ONE, ONE), w),
        Segment((ZERO, h, ZERO), (h, ONE, h), w),
        Segment((h, ZERO, ZERO), (ONE, h, h), w),
    ])


# ---------------------------------------------------------------------------
# Mass-rearranging transforms
# ---------------------------------------------------------------------------

def shift_transform(measure: SegmentMeasure, alpha: Sequence[RationalLike]) -> SegmentMeasure:
    """Toroidal shift: the result assigns to B the input's mass of B + alpha.

    Equivalently the support moves by ``-alpha`` componentwise mod 1.
    Segments are split where any coordinate wraps (at most one split per
    axis), with weights divided in proportion to parameter length.
    """
    shift = tuple(to_fraction(a) % 1 for a in alpha)
    if len(shift) != measure.n:
        raise DomainError("shift vector dimension mismatch")
    segments = []
    for seg in measure.segments:
        base = tuple(a - s for a, s in zip(seg.a, shift))
        delta = tuple(b - a for a, b in zip(seg.a, seg.b))
        cuts = {ZERO, ONE}
        for k in range(measure.n):
            if delta[k] == 0:
                continue
            v0, v1 = base[k], base[k] + delta[k]
            lo, hi = (v0, v1) if v0 < v1 else (v1, v0)
            for z in range(math.floor(lo) + 1, math.ceil(hi)):
                t = (z - base[k]) / delta[k]
                if ZERO < t < ONE:
                    cuts.add(t)
        ordered = sorted(cuts)
        for t0, t1 in zip(ordered, ordered[1:]):
            mid = (t0 + t1) / 2
            offs = tuple(math.floor(b + mid * d) for b, d in zip(base, delta))
            a_new = tuple(b + t0 * d - o for b, d, o in zip(base, delta, offs))
            b_new = tuple(b + t1 * d - o for b, d, o in zip(base, delta, offs))
            segments.append(Segment(a_new, b_new, seg.weight * (t1 - t0)))
    return SegmentMeasure(segments)


def swap_transform(measure: SegmentMeasure, axis: int, a: RationalLike,
                   b: RationalLike, delta: RationalLike) -> SegmentMeasure:
    """Exchange the two slabs ``[a, a+delta]`` and ``[b, b+delta]`` on one axis.

    The slabs must be disjoint subintervals of [0, 1].  The transform is an
    involution and preserves uniform marginals exactly.
    """
    if not 0 <= axis < measure.n:
        raise DomainError("axis out of range")
    a, b, delta = to_fraction(a), to_fraction(b), to_fraction(delta)
    if delta <= 0:
        raise DomainError("slab width must be positive")
    if not (ZERO <= a and a + delta <= ONE and ZERO <= b and b + delta <= ONE):
        raise DomainError("slabs must lie inside [0, 1]")
    if not (a + delta < b or b + delta < a):
        raise DomainError("slabs must be disjoint")

    def displacement(x: Fraction) -> Fraction:
        if a <= x <= a + delta:
            return b - a
        if b <= x <= b + delta:
            return a - b
        return ZERO

    boundaries = (a, a + delta, b, b + delta)
    segments = []
    for seg in measure.segments:
        p0, p1 = seg.a[axis], seg.b[axis]
        d = p1 - p0
        cuts = {ZERO, ONE}
        if d != 0:
            for x in boundaries:
                t = (x - p0) / d
                if ZERO < t < ONE:
                    cuts.add(t)
        ordered = sorted(cuts)
        for t0, t1 in zip(ordered, ordered[1:]):
            mid_x = p0 + (t0 + t1) / 2 * d
            move = displacement(mid_x)
            a_new = list(seg.a[k] + t0 * (seg.b[k] - seg.a[k]) for k in range(measure.n))
            b_new = list(seg.a[k] + t1 * (seg.b[k] - seg.a[k]) for k in range(measure.n))
            a_new[axis] += move
            b_new[axis] += move
            segments.append(Segment(tuple(a_new), tuple(b_new), seg.weight * (t1 - t0)))
    return SegmentMeasure(segments)


# ---------------------------------------------------------------------------
# Piecewise-linear maps and graph copulas
# ---------------------------------------------------------------------------

class PiecewiseLinearMap:
    """Map ``[0,1] -> [0,1]^{n-1}`` given per piece by affine coordinates.

    Pieces live on the half-open intervals between consecutive breakpoints
    (the last piece is closed at 1).  ``coeffs[j][c] = (slope, intercept)``
    describes output coordinate c on piece j.  All preimage computations
    are exact interval algebra on Fractions.
    """

    def __init__(self, breakpoints: Sequence[RationalLike], coeffs: Sequence):
        bp = fraction_tuple(breakpoints)
        if len(bp) < 2 or bp[0] != 0 or bp[-1] != 1:
            raise DomainError("breakpoints must run from 0 to 1")
        if any(x1 <= x0 for x0, x1 in zip(bp, bp[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        pieces = tuple(
            tuple((to_fraction(s), to_fraction(c)) for s, c in piece)
            for piece in coeffs
        )
        if len(pieces) != len(bp) - 1:
            raise DomainError("one coefficient row per breakpoint interval")
        width = {len(p) for p in pieces}
        if len(width) != 1 or width.pop() < 1:
            raise DomainError("pieces must agree on the number of coordinates")
        for j, piece in enumerate(pieces):
            for c, (s, icpt) in enumerate(piece):
                for x in (bp[j], bp[j + 1]):
                    v = s * x + icpt
                    if not (ZERO <= v <= ONE):
                        raise DomainError(
                            f"coordinate {c} leaves [0,1] on piece {j} (value {v})"
                        )
        self.breakpoints = bp
        self.coeffs = pieces

    @property
    def n_out(self) -> int:
        return len(self.coeffs[0])

    @property
    def n(self) -> int:
        """Dimension of the graph copula this map induces."""
        return self.n_out + 1

    def __repr__(self):
        return f"PiecewiseLinearMap(pieces={len(self.coeffs)}, n_out={self.n_out})"

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_values(cls, xs: Sequence[RationalLike], ys: Sequence) -> "PiecewiseLinearMap":
        """Interpolate breakpoint values; ``ys[i]`` is a scalar or a tuple."""
        xs = fraction_tuple(xs)
        rows = [y if isinstance(y, (tuple, list)) else (y,) for y in ys]
        if len(rows) != len(xs):
            raise DomainError("one value row per breakpoint")
        vals = [fraction_tuple(r) for r in rows]
        coeffs = []
        for j in range(len(xs) - 1):
            dx = xs[j + 1] - xs[j]
            piece = []
            for c in range(len(vals[0])):
                slope = (vals[j + 1][c] - vals[j][c]) / dx
                piece.append((slope, vals[j][c] - slope * xs[j]))
            coeffs.append(piece)
        return cls(xs, coeffs)

    @classmethod
    def identity(cls) -> "PiecewiseLinearMap":
        return cls((0, 1), [[(1, 0)]])

    @classmethod
    def reverse(cls) -> "PiecewiseLinearMap":
        return cls((0, 1), [[(-1, 1)]])

    @classmethod
    def times_mod_one(cls, k: int) -> "PiecewiseLinearMap":
        """The expanding circle map ``x -> k x mod 1`` (k >= 1)."""
        if k < 1:
            raise DomainError("multiplier must be >= 1")
        bp = [Fraction(j, k) for j in range(k + 1)]
        return cls(bp, [[(k, -j)] for j in range(k)])

    # -- evaluation -----------------------------------------------------------

    def piece_index(self, x: Fraction) -> int:
        if not (ZERO <= x <= ONE):
            raise DomainError("argument outside [0, 1]")
        if x == 1:
            return len(self.coeffs) - 1
        lo, hi = 0, len(self.coeffs) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.breakpoints[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def value(self, x: RationalLike, coord: int) -> Fraction:
        x = to_fraction(x)
        s, c = self.coeffs[self.piece_index(x)][coord]
        return s * x + c

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        """Float evaluation of all coordinates at an array of points."""
        x = np.asarray(xs, dtype=float)
        bp = np.array([float(v) for v in self.breakpoints])
        idx = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, len(self.coeffs) - 1)
        out = np.empty(x.shape + (self.n_out,))
        slopes = np.array([[float(s) for s, _ in piece] for piece in self.coeffs])
        icpts = np.array([[float(c) for _, c in piece] for piece in self.coeffs])
        for c in range(self.n_out):
            out[..., c] = slopes[idx, c] * x + icpts[idx, c]
        return out

    # -- preimages ------------------------------------------------------------

    def preimage_intervals(self, coord: int, lo: RationalLike, hi: RationalLike,
                           half_open: bool = False) -> list:
        """Exact ``f_coord^{-1}([lo, hi])`` as a normalized interval list.

        ``half_open`` switches the target to ``[lo, hi)``; this only changes
        whether constant pieces sitting exactly at ``hi`` are included.
        """
        lo, hi = to_fraction(lo), to_fraction(hi)
        if hi < lo:
            raise DomainError("empty target interval")
        out = []
        for j, piece in enumerate(self.coeffs):
            s, c = piece[coord]
            x0, x1 = self.breakpoints[j], self.breakpoints[j + 1]
            if s == 0:
                inside = (lo <= c < hi) if half_open else (lo <= c <= hi)
                if inside:
                    out.append((x0, x1))
                continue
            t0, t1 = (lo - c) / s, (hi - c) / s
            if s < 0:
                t0, t1 = t1, t0
            seg_lo, seg_hi = max(x0, t0), min(x1, t1)
            if seg_hi > seg_lo:
                out.append((seg_lo, seg_hi))
        return normalize_intervals(out)

    def measure_preservation_defect(self, coord: int):
        """Exact pushforward check for one coordinate.

        Returns ``None`` when the pushforward of Lebesgue measure under this
        coordinate is Lebesgue measure again, else a witness pair
        ``(interval, measured_preimage_length)``.  Constant pieces always
        fail (they create an atom).
        """
        for j, piece in enumerate(self.coeffs):
            s, c = piece[coord]
            if s == 0:
                return ((c, c), self.breakpoints[j + 1] - self.breakpoints[j])
        nodes = sorted({
            v
            for j, piece in enumerate(self.coeffs)
            for x in (self.breakpoints[j], self.breakpoints[j + 1])
            for v in (piece[coord][0] * x + piece[coord][1],)
        } | {ZERO, ONE})
        for y0, y1 in zip(nodes, nodes[1:]):
            # Density on (y0, y1): sum of 1/|slope| over pieces whose value
            # range covers the interval.
            density = ZERO
            for j, piece in enumerate(self.coeffs):
                s, c = piece[coord]
                lo_v = s * self.breakpoints[j] + c
                hi_v = s * self.breakpoints[j + 1] + c
                lo_v, hi_v = (lo_v, hi_v) if lo_v <= hi_v else (hi_v, lo_v)
                if lo_v <= y0 and hi_v >= y1:
                    density += 1 / abs(s)
            if density != 1:
                return ((y0, y1), density * (y1 - y0))
        return None


@dataclass(frozen=True)
class MeasurePreservationReport:
    ok: bool
    coord_ok: tuple
    max_deviation: Fraction
    witness_coord: int | None
    witness_interval: tuple | None
    witness_measured: Fraction | None


def measure_preserving_check(plm: PiecewiseLinearMap, r: int,
                             tol: RationalLike = MP_CHECK_TOL) -> MeasurePreservationReport:
    """Probe measure preservation on the dyadic intervals ``[j/r, (j+1)/r)``.

    For each output coordinate the exact preimage length of every interval
    is compared against 1/r.  The witness records the first interval of
    maximal deviation.
    """
    if r < 1:
        raise DomainError("resolution must be >= 1")
    tol = to_fraction(tol)
    target = Fraction(1, r)
    coord_ok = []
    max_dev = ZERO
    witness = (None, None, None)
    for coord in range(plm.n_out):
        worst = ZERO
        for j in range(r):
            lo, hi = Fraction(j, r), Fraction(j + 1, r)
            measured = total_length(
                plm.preimage_intervals(coord, lo, hi, half_open=(j < r - 1))
            )
            dev = abs(measured - target)
            worst = max(worst, dev)
            if dev > max_dev:
                max_dev = dev
                witness = (coord, (lo, hi), measured)
        coord_ok.append(worst <= tol)
    return MeasurePreservationReport(
        ok=all(coord_ok),
        coord_ok=tuple(coord_ok),
        max_deviation=max_dev,
        witness_coord=witness[0],
        witness_interval=witness[1],
        witness_measured=witness[2],
    )


class GraphCopula(Copula):
    """The unique copula supported on the graph ``{(x, f(x))}`` of a map
    that preserves Lebesgue measure in each coordinate.

    Box masses are ``lambda{x in [lo_0, hi_0] : f_c(x) in [lo_c, hi_c]}``,
    computed by exact intersection of piecewise-linear preimages.
    """

    def __init__(self, plm: PiecewiseLinearMap):
        for coord in range(plm.n_out):
            defect = plm.measure_preservation_defect(coord)
            if defect is not None:
                interval, measured = defect
                raise NotMeasurePreservingError(coord + 1, interval, measured)
        self.map = plm

    @property
    def n(self) -> int:
        return self.map.n

    def __repr__(self):
        return f"GraphCopula({self.map!r})"

    def box_mass_fraction(self, lo, hi) -> Fraction:
        window = normalize_intervals([(lo[0], hi[0])])
        for c in range(self.map.n_out):
            if not window:
                return ZERO
            window = intersect_interval_sets(
                window, self.map.preimage_intervals(c, lo[c + 1], hi[c + 1])
            )
        return total_length(window)

    def cdf_fraction(self, u) -> Fraction:
        zero = tuple(ZERO for _ in range(self.n))
        return self.box_mass_fraction(zero, u)

    def as_segments(self) -> SegmentMeasure:
        """The same measure as a segment union (one segment per piece).

        Mass along a piece's graph is uniform in x, and the interior
        diagonal of each piece's bounding box is parameterized linearly in
        x, so weighting each piece by its x-extent reproduces the measure
        exactly.
        """
        segments = []
        for j, piece in enumerate(self.map.coeffs):
            x0, x1 = self.map.breakpoints[j], self.map.breakpoints[j + 1]
            a = (x0,) + tuple(s * x0 + c for s, c in piece)
            b = (x1,) + tuple(s * x1 + c for s, c in piece)
            segments.append(Segment(a, b, x1 - x0))
        return SegmentMeasure(segments)

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        bp = [float(v) for v in self.map.breakpoints]
        total = np.zeros(pts.shape[0])
        for j, piece in enumerate(self.map.coeffs):
            x_lo = np.full(pts.shape[0], bp[j])
            x_hi = np.minimum(bp[j + 1], pts[:, 0])
            ok = np.ones(pts.shape[0], dtype=bool)
            for c, (s, icpt) in enumerate(piece):
                s, icpt = float(s), float(icpt)
                u = pts[:, c + 1]
                if s > 0:
                    x_hi = np.minimum(x_hi, (u - icpt) / s)
                elif s < 0:
                    x_lo = np.maximum(x_lo, (u - icpt) / s)
                else:
                    ok &= u >= icpt
            total += np.where(ok, np.clip(x_hi - x_lo, 0.0, None), 0.0)
        return total


def graph_copula(plm: PiecewiseLinearMap) -> GraphCopula:
    """Copula supported on the graph of ``plm``.

    Raises :class:`NotMeasurePreservingError` with a witness interval when
    some coordinate fails to preserve Lebesgue measure (no copula lives on
    such a graph).
    """
    return GraphCopula(plm)
