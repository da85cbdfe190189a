"""Shared random generators for exact test fixtures."""

from fractions import Fraction

import numpy as np

import extremal_copulas as xc


def random_rational(rng, max_den=24, lo=0, hi=1):
    den = int(rng.integers(2, max_den + 1))
    num = int(rng.integers(int(lo * den), int(hi * den) + 1))
    return Fraction(num, den)


def random_breaks(rng, blocks, max_den=24):
    """Strictly increasing rational breaks from 0 to 1."""
    while True:
        inner = sorted(random_rational(rng, max_den) for _ in range(blocks - 1))
        breaks = [Fraction(0)] + inner + [Fraction(1)]
        if all(b < c for b, c in zip(breaks, breaks[1:])):
            return breaks


def random_orientation(rng, n):
    return (1,) + tuple(int(s) for s in rng.choice([1, -1], size=n - 1))


def random_permutation_spec(rng, max_m=8, n=2):
    m = int(rng.integers(1, max_m + 1))
    perms = tuple(tuple(int(v) for v in rng.permutation(m)) for _ in range(n - 1))
    orients = tuple(random_orientation(rng, n) for _ in range(m))
    return xc.PermutationCopulaSpec(m, perms, orients)


def random_construction(rng):
    """A random exact copula segment measure, sometimes transformed."""
    kind = rng.integers(0, 4)
    if kind == 0:
        t = random_rational(rng)
        while not (0 < t < 1):
            t = random_rational(rng)
        sm = xc.tent_copula(t, n=int(rng.integers(2, 4)))
    elif kind == 1:
        n = int(rng.integers(2, 4))
        blocks = int(rng.integers(1, 5))
        orients = [random_orientation(rng, n) for _ in range(blocks)]
        sm = xc.shuffle_copula(random_breaks(rng, blocks), orients, n=n)
    elif kind == 2:
        sm = xc.permutation_copula(random_permutation_spec(rng, n=int(rng.integers(2, 4))))
    else:
        sm = xc.four_line_3d()
    twist = rng.integers(0, 3)
    if twist == 1:
        alpha = [random_rational(rng) for _ in range(sm.n)]
        sm = xc.shift_transform(sm, alpha)
    elif twist == 2:
        delta = Fraction(1, int(rng.integers(5, 12)))
        a = random_rational(rng, 8, 0, 0.3)
        b = a + delta + random_rational(rng, 8, 0, 0.2) + Fraction(1, 100)
        if b + delta <= 1:
            sm = xc.swap_transform(sm, int(rng.integers(0, sm.n)), a, b, delta)
    return sm


def random_grid_measure(rng, m, n, layers=None):
    """Multi-stochastic integer tensor as a sum of permutation tensors."""
    layers = layers or int(rng.integers(1, 5))
    entries = np.zeros((m,) * n, dtype=np.int64)
    rows = np.arange(m)
    for _ in range(layers):
        idx = (rows,) + tuple(rng.permutation(m) for _ in range(n - 1))
        entries[idx] += 1
    return xc.GridMeasure(xc.GridSpec(n, m), m * layers, entries)
