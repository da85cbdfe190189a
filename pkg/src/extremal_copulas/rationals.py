"""Exact rational arithmetic helpers and one-dimensional interval algebra.

All geometry in this package is carried in ``fractions.Fraction``.  Floats
entering through public constructors are converted exactly (every binary64
value is a dyadic rational), so downstream mass computations are exact and
validation criteria can be checked with zero tolerance.

Interval sets are plain lists of ``(lo, hi)`` Fraction pairs, kept sorted and
disjoint with ``lo < hi``.  Endpoint conventions are irrelevant for lengths;
operations that do care about boundary membership handle it explicitly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

RationalLike = Union[int, float, str, Fraction]
Interval = "tuple[Fraction, Fraction]"

ZERO = Fraction(0)
ONE = Fraction(1)


def to_fraction(x: RationalLike) -> Fraction:
    """Convert exactly to ``Fraction``; floats use their binary value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    if isinstance(x, str):
        text = x.strip()
        try:
            return Fraction(text)
        except ValueError:
            return Fraction(float(text))
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def fraction_tuple(xs: Iterable[RationalLike]) -> tuple[Fraction, ...]:
    return tuple(to_fraction(x) for x in xs)


def frac_array_to_float(arr: np.ndarray) -> np.ndarray:
    """Elementwise ``float()`` on an object array of Fractions."""
    out = np.empty(arr.shape, dtype=float)
    flat_out = out.reshape(-1)
    for i, v in enumerate(arr.reshape(-1)):
        flat_out[i] = float(v)
    return out


def object_array(values, shape=None) -> np.ndarray:
    """Object ndarray of Fractions (numpy would coerce them otherwise)."""
    arr = np.empty(len(values) if shape is None else shape, dtype=object)
    arr.reshape(-1)[:] = [to_fraction(v) for v in values]
    return arr


# ---------------------------------------------------------------------------
# Interval sets
# ---------------------------------------------------------------------------

def normalize_intervals(intervals: Sequence) -> list:
    """Sort, drop empty pieces, and merge overlapping/touching intervals."""
    items = []
    for lo, hi in intervals:
        lo, hi = to_fraction(lo), to_fraction(hi)
        if hi > lo:
            items.append((lo, hi))
    items.sort()
    merged: list = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            prev_lo, prev_hi = merged[-1]
            merged[-1] = (prev_lo, max(prev_hi, hi))
        else:
            merged.append((lo, hi))
    return merged


def intersect_interval_sets(a: Sequence, b: Sequence) -> list:
    """Intersection of two normalized interval sets (two-pointer sweep)."""
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi > lo:
            out.append((lo, hi))
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return out


def total_length(intervals: Sequence) -> Fraction:
    return sum((hi - lo for lo, hi in intervals), start=ZERO)


def complement_in_unit(intervals: Sequence) -> list:
    """Complement of a normalized interval set within [0, 1]."""
    out = []
    cursor = ZERO
    for lo, hi in intervals:
        if lo > cursor:
            out.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < ONE:
        out.append((cursor, ONE))
    return out
