"""Measures and copula models on the unit cube.

Conventions
-----------
* A *copula* here is an n-dimensional distribution concentrated on
  ``[0,1]^n`` with uniform univariate marginals; models expose both the
  distribution function ``C(u) = mass of [0, u]`` and rectangle masses.
* Coordinates and weights are stored as exact ``Fraction`` values.  Every
  model implements ``cdf_fraction`` (exact) next to the float convenience
  methods, so marginal validation can run with zero tolerance.
* Axes are 0-based.  Grid cells at resolution ``m`` follow the half-open
  convention ``[j/m, (j+1)/m)`` with the last cell closed at 1; since mass
  sits on segments or densities, shared boundaries carry zero mass and the
  convention only matters for axis-degenerate segments.

The central representation is :class:`SegmentMeasure`, a finite weighted
union of line segments each carrying uniform (arclength) mass.  The mass a
segment places in a box reduces to exact interval arithmetic on its
parameter, so no quadrature appears anywhere in this module.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InvalidMeasureError
from .rationals import (
    ONE,
    ZERO,
    RationalLike,
    frac_array_to_float,
    fraction_tuple,
    to_fraction,
)

Coords = "tuple[Fraction, ...]"

WEIGHT_SUM_TOL = Fraction(1, 10**12)


def as_unit_point(coords: Iterable[RationalLike], n: int | None = None) -> Coords:
    """Validate and convert a point of ``[0,1]^n`` (n >= 2) to Fractions."""
    pt = fraction_tuple(coords)
    if n is not None and len(pt) != n:
        raise DomainError(f"expected a point of dimension {n}, got {len(pt)}")
    if len(pt) < 2:
        raise DomainError("points must have dimension >= 2")
    for c in pt:
        if not (ZERO <= c <= ONE):
            raise DomainError(f"coordinate {c} outside [0, 1]")
    return pt


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed rectangle ``[lo, hi]`` inside the unit cube."""

    lo: Coords
    hi: Coords

    def __post_init__(self):
        object.__setattr__(self, "lo", as_unit_point(self.lo))
        object.__setattr__(self, "hi", as_unit_point(self.hi, n=len(self.lo)))
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise DomainError("box corners must satisfy lo <= hi componentwise")

    @property
    def n(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class Segment:
    """Line segment with uniform mass ``weight`` along its length."""

    a: Coords
    b: Coords
    weight: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", as_unit_point(self.a))
        object.__setattr__(self, "b", as_unit_point(self.b, n=len(self.a)))
        object.__setattr__(self, "weight", to_fraction(self.weight))
        if self.weight < 0:
            raise InvalidMeasureError("segment weight must be non-negative")
        if self.weight > 0 and self.a == self.b:
            raise InvalidMeasureError("degenerate segment with positive weight")

    @property
    def n(self) -> int:
        return len(self.a)


def segment_box_mass(segment: Segment, box: Box) -> Fraction:
    """Mass the segment's uniform measure assigns to a closed box.

    The parameter set ``{t in [0,1] : a + t(b-a) in box}`` is an interval;
    the mass is ``weight`` times its length.  Exact interval arithmetic.
    """
    if segment.n != box.n:
        raise DomainError("segment and box dimensions differ")
    t_lo, t_hi = ZERO, ONE
    for k in range(segment.n):
        a, d = segment.a[k], segment.b[k] - segment.a[k]
        lo, hi = box.lo[k], box.hi[k]
        if d == 0:
            if not (lo <= a <= hi):
                return ZERO
        elif d > 0:
            t_lo = max(t_lo, (lo - a) / d)
            t_hi = min(t_hi, (hi - a) / d)
        else:
            t_lo = max(t_lo, (hi - a) / d)
            t_hi = min(t_hi, (lo - a) / d)
        if t_hi <= t_lo:
            return ZERO
    return segment.weight * (t_hi - t_lo)


# ---------------------------------------------------------------------------
# Model interface
# ---------------------------------------------------------------------------

class Copula(ABC):
    """Common interface: exact CDF, box masses, slab masses, float sweeps."""

    @property
    @abstractmethod
    def n(self) -> int:
        """Dimension of the underlying cube."""

    @abstractmethod
    def cdf_fraction(self, u: Coords) -> Fraction:
        """Exact ``C(u)``, the mass of ``[0, u]``; ``u`` must be Fractions."""

    def box_mass_fraction(self, lo: Coords, hi: Coords) -> Fraction:
        """Exact mass of ``[lo, hi]`` by inclusion-exclusion over CDF corners."""
        n = self.n
        total = ZERO
        for mask in range(1 << n):
            corner = tuple(
                hi[k] if not (mask >> k) & 1 else lo[k] for k in range(n)
            )
            sign = -1 if bin(mask).count("1") % 2 else 1
            total += sign * self.cdf_fraction(corner)
        return total

    # -- float conveniences -------------------------------------------------

    def cdf(self, u: Sequence[RationalLike]) -> float:
        pt = as_unit_point(u, n=self.n)
        return float(self.cdf_fraction(pt))

    def box_mass(self, box: Box) -> float:
        if box.n != self.n:
            raise DomainError("box dimension mismatch")
        return float(self.box_mass_fraction(box.lo, box.hi))

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float CDF; default falls back to the exact evaluator."""
        pts = np.asarray(points, dtype=float)
        out = np.empty(pts.shape[0])
        for i, row in enumerate(pts):
            out[i] = float(self.cdf_fraction(fraction_tuple(row)))
        return out

    def slice_masses(self, axis: int, m: int) -> list:
        """Exact masses of the m axis-aligned slabs along ``axis``."""
        if not 0 <= axis < self.n:
            raise DomainError(f"axis {axis} out of range for dimension {self.n}")
        if m < 1:
            raise DomainError("resolution m must be >= 1")
        masses = []
        for j in range(m):
            lo = tuple(Fraction(j, m) if k == axis else ZERO for k in range(self.n))
            hi = tuple(Fraction(j + 1, m) if k == axis else ONE for k in range(self.n))
            masses.append(self.box_mass_fraction(lo, hi))
        return masses


# ---------------------------------------------------------------------------
# Segment-backed measures
# ---------------------------------------------------------------------------

class SegmentMeasure(Copula):
    """Finite weighted union of segments carrying uniform mass.

    Weights must sum to 1 (exactly, or within 1e-12 for measures built from
    rounded float data).  Whether the measure is an actual copula is decided
    by :func:`validate_copula_measure`, not by construction.
    """

    def __init__(self, segments: Iterable[Segment]):
        segs = tuple(s for s in segments if s.weight > 0)
        if not segs:
            raise InvalidMeasureError("segment measure needs positive total mass")
        n = segs[0].n
        if any(s.n != n for s in segs):
            raise InvalidMeasureError("segments of mixed dimension")
        total = sum((s.weight for s in segs), start=ZERO)
        if abs(total - 1) > WEIGHT_SUM_TOL:
            raise InvalidMeasureError(
                f"weights not normalized: total mass {float(total):.12g}"
            )
        self.segments = segs
        self._n = n

    @property
    def n(self) -> int:
        return self._n

    def __repr__(self):
        return f"SegmentMeasure(n={self._n}, segments={len(self.segments)})"

    def __eq__(self, other):
        return (
            isinstance(other, SegmentMeasure)
            and self._n == other._n
            and sorted((s.a, s.b, s.weight) for s in self.segments)
            == sorted((s.a, s.b, s.weight) for s in other.segments)
        )

    def __hash__(self):
        return hash((self._n, len(self.segments)))

    def total_weight(self) -> Fraction:
        return sum((s.weight for s in self.segments), start=ZERO)

    def cdf_fraction(self, u: Coords) -> Fraction:
        box = Box(tuple(ZERO for _ in range(self._n)), u)
        return sum((segment_box_mass(s, box) for s in self.segments), start=ZERO)

    def box_mass_fraction(self, lo: Coords, hi: Coords) -> Fraction:
        # Direct interval arithmetic; cheaper and exact, unlike the default
        # inclusion-exclusion route (which must agree and is tested to).
        box = Box(lo, hi)
        return sum((segment_box_mass(s, box) for s in self.segments), start=ZERO)

    @cached_property
    def _float_arrays(self):
        a = np.array([[float(c) for c in s.a] for s in self.segments])
        b = np.array([[float(c) for c in s.b] for s in self.segments])
        w = np.array([float(s.weight) for s in self.segments])
        return a, b - a, w

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        a, d, w = self._float_arrays
        total = np.zeros(pts.shape[0])
        for s in range(a.shape[0]):
            # Segment endpoints live in the cube, so only x_k <= u_k binds.
            t_lo = np.zeros(pts.shape[0])
            t_hi = np.ones(pts.shape[0])
            ok = np.ones(pts.shape[0], dtype=bool)
            for k in range(self._n):
                if d[s, k] > 0:
                    t_hi = np.minimum(t_hi, (pts[:, k] - a[s, k]) / d[s, k])
                elif d[s, k] < 0:
                    t_lo = np.maximum(t_lo, (pts[:, k] - a[s, k]) / d[s, k])
                else:
                    ok &= pts[:, k] >= a[s, k]
            length = np.clip(t_hi - t_lo, 0.0, None)
            total += w[s] * np.where(ok, length, 0.0)
        return total

    def slice_masses(self, axis: int, m: int) -> list:
        if not 0 <= axis < self._n:
            raise DomainError(f"axis {axis} out of range for dimension {self._n}")
        if m < 1:
            raise DomainError("resolution m must be >= 1")
        out = [ZERO] * m
        for seg in self.segments:
            a, b = seg.a[axis], seg.b[axis]
            if a == b:
                # Axis-degenerate segment: whole weight lands in the
                # half-open cell containing the constant coordinate.
                j = min(int(a * m), m - 1)
                out[j] += seg.weight
                continue
            lo, hi = (a, b) if a < b else (b, a)
            speed = hi - lo
            cuts = [lo]
            first = math.floor(lo * m) + 1
            last = math.ceil(hi * m) - 1
            cuts.extend(Fraction(j, m) for j in range(first, last + 1))
            cuts.append(hi)
            for x0, x1 in zip(cuts, cuts[1:]):
                if x1 <= x0:
                    continue
                mid = (x0 + x1) / 2
                j = min(int(mid * m), m - 1)
                out[j] += seg.weight * (x1 - x0) / speed
        return out

    def sample(self, count: int, seed: int = 0) -> np.ndarray:
        return sample(self, count, seed)


def sample(measure: SegmentMeasure, count: int, seed: int = 0) -> np.ndarray:
    """I.i.d. draws from a segment measure as a ``(count, n)`` float array.

    Segments are chosen by weight, then a uniform parameter picks the point.
    Deterministic for a fixed seed.
    """
    if count < 0:
        raise DomainError("count must be >= 0")
    a, d, w = measure._float_arrays
    if count == 0:
        return np.empty((0, measure.n))
    rng = np.random.default_rng(seed)
    p = w / w.sum()
    idx = rng.choice(len(p), size=count, p=p)
    t = rng.random(count)
    return a[idx] + t[:, None] * d[idx]


# ---------------------------------------------------------------------------
# Grid-backed objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("grid dimension must be >= 2")
        if self.m < 1:
            raise DomainError("grid resolution must be >= 1")

    @property
    def shape(self) -> tuple:
        return (self.m,) * self.n


class GridMeasure:
    """Exact cell masses on an m-grid, stochastic in every coordinate.

    ``entries`` is an integer tensor; cell ``i`` carries mass
    ``entries[i]/denominator``.  Every axis-aligned slab of cells must sum
    to ``denominator/m`` exactly, which makes all marginals uniform at
    resolution m.
    """

    def __init__(self, spec: GridSpec, denominator: int, entries: np.ndarray):
        denominator = int(denominator)
        if denominator <= 0 or denominator % spec.m != 0:
            raise InvalidMeasureError(
                "denominator must be a positive multiple of the grid order"
            )
        arr = np.array(entries, dtype=np.int64).reshape(spec.shape)
        if (arr < 0).any():
            raise InvalidMeasureError("cell masses must be non-negative")
        slab = denominator // spec.m
        for axis in range(spec.n):
            sums = arr.sum(axis=tuple(k for k in range(spec.n) if k != axis))
            if not (sums == slab).all():
                raise InvalidMeasureError(
                    f"axis {axis} slab sums {sums.tolist()} != {slab} exactly"
                )
        arr.flags.writeable = False
        self.spec = spec
        self.denominator = denominator
        self.entries = arr

    def __repr__(self):
        return f"GridMeasure(n={self.spec.n}, m={self.spec.m}, D={self.denominator})"

    def __eq__(self, other):
        return (
            isinstance(other, GridMeasure)
            and self.spec == other.spec
            and self.denominator == other.denominator
            and (self.entries == other.entries).all()
        )

    def cell_mass(self, index: tuple) -> Fraction:
        return Fraction(int(self.entries[index]), self.denominator)

    def to_density(self) -> "GridDensity":
        scale = Fraction(self.spec.m ** self.spec.n, self.denominator)
        values = np.empty(self.spec.shape, dtype=object)
        flat = values.reshape(-1)
        for i, t in enumerate(self.entries.reshape(-1)):
            flat[i] = scale * int(t)
        return GridDensity(self.spec, values)

    def as_float(self) -> np.ndarray:
        return self.entries.astype(float) / self.denominator


class GridDensity(Copula):
    """Piecewise-constant copula density on an m-grid (exact rationals).

    ``values[i]`` is the density on cell ``i``; validity requires every
    axis slab of cells to integrate to 1/m, i.e. slab sums equal
    ``m**(n-1)`` exactly.
    """

    def __init__(self, spec: GridSpec, values: np.ndarray):
        arr = np.empty(spec.shape, dtype=object)
        arr.reshape(-1)[:] = [to_fraction(v) for v in np.asarray(values, dtype=object).reshape(-1)]
        if any(v < 0 for v in arr.reshape(-1)):
            raise InvalidMeasureError("density values must be non-negative")
        target = Fraction(spec.m ** (spec.n - 1))
        for axis in range(spec.n):
            sums = arr.sum(axis=tuple(k for k in range(spec.n) if k != axis))
            for j, s in enumerate(np.atleast_1d(sums)):
                if s != target:
                    raise InvalidMeasureError(
                        f"axis {axis} slab {j} integrates to {s}/{spec.m**spec.n}"
                        f" per cell row, expected uniform marginals"
                    )
        arr.flags.writeable = False
        self.spec = spec
        self.values = arr

    @property
    def n(self) -> int:
        return self.spec.n

    def __repr__(self):
        return f"GridDensity(n={self.spec.n}, m={self.spec.m})"

    def __eq__(self, other):
        return (
            isinstance(other, GridDensity)
            and self.spec == other.spec
            and (self.values == other.values).all()
        )

    def refine(self, factor: int = 2) -> "GridDensity":
        """Subdivide each cell ``factor`` times per axis (same density)."""
        if factor < 1:
            raise DomainError("refinement factor must be >= 1")
        arr = self.values
        for axis in range(self.spec.n):
            arr = np.repeat(arr, factor, axis=axis)
        return GridDensity(GridSpec(self.spec.n, self.spec.m * factor), arr)

    def cell_mass(self, index: tuple) -> Fraction:
        return self.values[index] / Fraction(self.spec.m ** self.spec.n)

    def box_mass_fraction(self, lo: Coords, hi: Coords) -> Fraction:
        m = self.spec.m
        # Per-axis overlap of [lo_k, hi_k] with each cell interval.
        overlaps = []
        for k in range(self.spec.n):
            row = []
            for j in range(m):
                c_lo, c_hi = Fraction(j, m), Fraction(j + 1, m)
                row.append(max(ZERO, min(hi[k], c_hi) - max(lo[k], c_lo)))
            overlaps.append(row)
        total = ZERO
        for idx in np.ndindex(self.spec.shape):
            d = self.values[idx]
            if d == 0:
                continue
            vol = ONE
            for k, j in enumerate(idx):
                o = overlaps[k][j]
                if o == 0:
                    vol = ZERO
                    break
                vol *= o
            if vol != 0:
                total += d * vol
        return total

    def cdf_fraction(self, u: Coords) -> Fraction:
        return self.box_mass_fraction(tuple(ZERO for _ in u), u)

    @cached_property
    def _float_values(self) -> np.ndarray:
        return frac_array_to_float(self.values)

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        m = self.spec.m
        vals = self._float_values
        edges = np.arange(m + 1) / m
        # overlap[k][:, j] = |[0,u_k] ∩ cell j|
        overlaps = [
            np.clip(pts[:, k, None], edges[None, :-1], edges[None, 1:]) - edges[None, :-1]
            for k in range(self.spec.n)
        ]
        total = np.zeros(pts.shape[0])
        for idx in np.ndindex(self.spec.shape):
            d = vals[idx]
            if d == 0.0:
                continue
            vol = overlaps[0][:, idx[0]].copy()
            for k in range(1, self.spec.n):
                vol *= overlaps[k][:, idx[k]]
            total += d * vol
        return total


class MixedMeasure(Copula):
    """Convex mix of an absolutely continuous part and a singular part."""

    def __init__(self, ac_weight: RationalLike, density: GridDensity | None,
                 singular: SegmentMeasure | None):
        w = to_fraction(ac_weight)
        if not (ZERO <= w <= ONE):
            raise InvalidMeasureError("ac_weight must lie in [0, 1]")
        if (w == 0) != (density is None):
            raise InvalidMeasureError("ac_weight must be 0 iff density is absent")
        if (w == 1) != (singular is None):
            raise InvalidMeasureError("singular part absent iff ac_weight is 1")
        if density is not None and singular is not None and density.n != singular.n:
            raise InvalidMeasureError("component dimensions differ")
        self.ac_weight = w
        self.density = density
        self.singular = singular

    @classmethod
    def from_density(cls, density: GridDensity) -> "MixedMeasure":
        return cls(ONE, density, None)

    @classmethod
    def from_singular(cls, singular: SegmentMeasure) -> "MixedMeasure":
        return cls(ZERO, None, singular)

    @property
    def n(self) -> int:
        return self.density.n if self.density is not None else self.singular.n

    def __repr__(self):
        return (f"MixedMeasure(ac_weight={self.ac_weight}, "
                f"density={self.density!r}, singular={self.singular!r})")

    def cdf_fraction(self, u: Coords) -> Fraction:
        total = ZERO
        if self.density is not None:
            total += self.ac_weight * self.density.cdf_fraction(u)
        if self.singular is not None:
            total += (1 - self.ac_weight) * self.singular.cdf_fraction(u)
        return total

    def box_mass_fraction(self, lo: Coords, hi: Coords) -> Fraction:
        total = ZERO
        if self.density is not None:
            total += self.ac_weight * self.density.box_mass_fraction(lo, hi)
        if self.singular is not None:
            total += (1 - self.ac_weight) * self.singular.box_mass_fraction(lo, hi)
        return total

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        total = np.zeros(pts.shape[0])
        if self.density is not None:
            total += float(self.ac_weight) * self.density.cdf_many(pts)
        if self.singular is not None:
            total += float(1 - self.ac_weight) * self.singular.cdf_many(pts)
        return total


# ---------------------------------------------------------------------------
# Analytic families
# ---------------------------------------------------------------------------

class Independence(Copula):
    """Product copula: ``C(u) = prod(u_k)``."""

    def __init__(self, n: int = 2):
        if n < 2:
            raise DomainError("dimension must be >= 2")
        self._n = n

    @property
    def n(self) -> int:
        return self._n

    def __repr__(self):
        return f"Independence(n={self._n})"

    def cdf_fraction(self, u: Coords) -> Fraction:
        out = ONE
        for c in u:
            out *= c
        return out

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        return np.prod(np.atleast_2d(np.asarray(points, float)), axis=1)


class Comonotone(Copula):
    """Upper Frechet bound: ``C(u) = min(u_k)``; mass on the main diagonal."""

    def __init__(self, n: int = 2):
        if n < 2:
            raise DomainError("dimension must be >= 2")
        self._n = n

    @property
    def n(self) -> int:
        return self._n

    def __repr__(self):
        return f"Comonotone(n={self._n})"

    def cdf_fraction(self, u: Coords) -> Fraction:
        return min(u)

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        return np.min(np.atleast_2d(np.asarray(points, float)), axis=1)

    def as_segments(self) -> SegmentMeasure:
        return SegmentMeasure([
            Segment((ZERO,) * self._n, (ONE,) * self._n, ONE)
        ])


class Countermonotone(Copula):
    """Lower Frechet bound for n=2: ``C(u,v) = max(u+v-1, 0)``."""

    @property
    def n(self) -> int:
        return 2

    def __repr__(self):
        return "Countermonotone()"

    def cdf_fraction(self, u: Coords) -> Fraction:
        return max(u[0] + u[1] - 1, ZERO)

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, float))
        return np.clip(pts[:, 0] + pts[:, 1] - 1.0, 0.0, None)

    def as_segments(self) -> SegmentMeasure:
        return SegmentMeasure([Segment((ZERO, ONE), (ONE, ZERO), ONE)])


class FGM(Copula):
    """Farlie-Gumbel-Morgenstern family ``C(u,v) = uv(1 + θ(1-u)(1-v))``.

    Absolutely continuous for θ in [-1, 1]; the canonical smooth test case
    because its CDF is a rational polynomial.
    """

    def __init__(self, theta: RationalLike = 1):
        t = to_fraction(theta)
        if not (-ONE <= t <= ONE):
            raise DomainError("FGM parameter must lie in [-1, 1]")
        self.theta = t

    @property
    def n(self) -> int:
        return 2

    def __repr__(self):
        return f"FGM(theta={self.theta})"

    def cdf_fraction(self, u: Coords) -> Fraction:
        x, y = u
        return x * y * (1 + self.theta * (1 - x) * (1 - y))

    def cdf_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, float))
        x, y = pts[:, 0], pts[:, 1]
        return x * y * (1.0 + float(self.theta) * (1.0 - x) * (1.0 - y))


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

def cdf_eval(model: Copula, u: Sequence[RationalLike]) -> float:
    """Float CDF value ``C(u)``; raises ``DomainError`` outside the cube."""
    return model.cdf(u)


def marginal_slice_masses(model: Copula, axis: int, m: int) -> list:
    """Exact masses of the m slabs ``{u : u_axis in [j/m,(j+1)/m)}``."""
    return model.slice_masses(axis, m)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    max_deviation: Fraction
    worst_axis: int
    worst_slab: int
    m: int
    tol: Fraction


def validate_copula_measure(model: Copula, m: int, tol: RationalLike = 0) -> ValidationReport:
    """Check uniform marginals at resolution m with exact slab masses.

    ``ok`` iff every slab mass deviates from 1/m by at most ``tol``.
    Rational-backed models support ``tol=0``.  A segment measure whose
    weights do not sum to one is rejected outright.
    """
    tol = to_fraction(tol)
    if isinstance(model, SegmentMeasure):
        total = model.total_weight()
        if total != 1 and abs(total - 1) > WEIGHT_SUM_TOL:
            raise InvalidMeasureError(
                f"weights not normalized: total mass {float(total):.12g}"
            )
    target = Fraction(1, m)
    worst = (ZERO, 0, 0)
    for axis in range(model.n):
        for j, mass in enumerate(model.slice_masses(axis, m)):
            dev = abs(mass - target)
            if dev > worst[0]:
                worst = (dev, axis, j)
    return ValidationReport(
        ok=worst[0] <= tol,
        max_deviation=worst[0],
        worst_axis=worst[1],
        worst_slab=worst[2],
        m=m,
        tol=tol,
    )


@dataclass(frozen=True)
class DinfResult:
    estimate: float
    certified_bound: float
    at: tuple

    def __iter__(self):
        return iter((self.estimate, self.certified_bound))


def dinf_distance(a: Copula, b: Copula, r: int, exact: bool = False) -> DinfResult:
    """Uniform-distance estimate between two copula CDFs.

    ``estimate`` is the max of ``|C_a - C_b|`` over the ``(r+1)^n`` lattice
    of step 1/r; since copulas are 1-Lipschitz per coordinate the true sup
    is at most ``estimate + n/r``, reported as ``certified_bound``.  With
    ``exact=True`` lattice values are compared in rational arithmetic.
    """
    if a.n != b.n:
        raise DomainError("dimension mismatch")
    if r < 1:
        raise DomainError("lattice resolution must be >= 1")
    n = a.n
    if exact:
        best = ZERO
        best_at = (ZERO,) * n
        for idx in np.ndindex(*(r + 1,) * n):
            u = tuple(Fraction(j, r) for j in idx)
            dev = abs(a.cdf_fraction(u) - b.cdf_fraction(u))
            if dev > best:
                best, best_at = dev, u
        return DinfResult(float(best), float(best + Fraction(n, r)),
                          tuple(float(c) for c in best_at))
    axes = [np.arange(r + 1) / r] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in mesh], axis=1)
    diff = np.abs(a.cdf_many(pts) - b.cdf_many(pts))
    i = int(np.argmax(diff))
    return DinfResult(float(diff[i]), float(diff[i] + n / r), tuple(pts[i]))


def grid_extract(model: Copula, m: int, exact: bool = False) -> np.ndarray:
    """Tensor of cell masses at resolution m via CDF corner differencing.

    Returns a float tensor of shape ``(m,)*n`` (or exact Fractions with
    ``exact=True``).  Masses sum to 1 and are stochastic in every
    coordinate whenever the model is a copula.
    """
    if m < 1:
        raise DomainError("resolution m must be >= 1")
    n = model.n
    corners = np.empty((m + 1,) * n, dtype=object)
    for idx in np.ndindex(*corners.shape):
        corners[idx] = model.cdf_fraction(tuple(Fraction(j, m) for j in idx))
    cells = corners
    for axis in range(n):
        cells = np.diff(cells, axis=axis)
    if exact:
        return cells
    return frac_array_to_float(cells)


def grid_density_from_copula(model: Copula, m: int) -> GridDensity:
    """Cell-averaged density whose cell masses match the model exactly."""
    cells = grid_extract(model, m, exact=True)
    scale = Fraction(m ** model.n)
    values = np.empty(cells.shape, dtype=object)
    flat = values.reshape(-1)
    for i, v in enumerate(cells.reshape(-1)):
        flat[i] = v * scale
    return GridDensity(GridSpec(model.n, m), values)


def stochasticity_error(masses: np.ndarray) -> float:
    """Max deviation of any axis slab sum of a float mass tensor from 1/m."""
    arr = np.asarray(masses, dtype=float)
    m = arr.shape[0]
    worst = 0.0
    for axis in range(arr.ndim):
        sums = arr.sum(axis=tuple(k for k in range(arr.ndim) if k != axis))
        worst = max(worst, float(np.max(np.abs(sums - 1.0 / m))))
    return worst
