import math
from fractions import Fraction

import numpy as np
import pytest

import extremal_copulas as xc
from extremal_copulas.errors import DomainError, RationalizationError

from helpers import random_grid_measure

F = Fraction


class TestRationalize:
    def test_already_exact(self):
        gm = xc.rationalize(np.full((2, 2), 0.25), 2, 8)
        assert (gm.entries == 2).all()
        assert xc.rationalization_error(gm, np.full((2, 2), 0.25)) == 0.0

    def test_exact_multiples_of_d(self):
        M = np.array([[0.3, 0.2], [0.2, 0.3]])
        gm = xc.rationalize(M, 2, 40)
        assert gm.entries.tolist() == [[12, 8], [8, 12]]
        assert xc.rationalization_error(gm, M) == 0.0

    def test_irrational_entries_round_within_bound(self):
        a = 1 / math.sqrt(8)
        M = np.array([[a, 0.5 - a], [0.5 - a, a]])
        gm = xc.rationalize(M, 2, 40)
        assert gm.entries.tolist() == [[14, 6], [6, 14]]
        rho = xc.rationalization_error(gm, M)
        assert rho == pytest.approx(a - 14 / 40, abs=1e-12)
        assert rho < 2 ** -3

    def test_slice_sums_exact_after_rounding(self):
        rng = np.random.default_rng(8)
        # random stochastic tensor with irrational-ish floats
        base = random_grid_measure(rng, 4, 2, layers=7).as_float()
        jitter = base + 0.0  # grid measure floats already stochastic
        gm = xc.rationalize(jitter, 4, 4 ** 4)
        slab = gm.denominator // 4
        for axis in range(2):
            sums = gm.entries.sum(axis=1 - axis)
            assert (sums == slab).all()
        assert xc.rationalization_error(gm, jitter) < 4.0 ** -3

    def test_three_dimensional_greedy(self):
        rng = np.random.default_rng(15)
        M = random_grid_measure(rng, 3, 3, layers=5).as_float()
        # perturb within stochastic tolerance to force fractional parts
        gm = xc.rationalize(M, 3, 3 ** 5)
        assert xc.rationalization_error(gm, M) < 3.0 ** -4
        for axis in range(3):
            sums = gm.entries.sum(axis=tuple(a for a in range(3) if a != axis))
            assert (sums == gm.denominator // 3).all()

    def test_rejects_non_stochastic(self):
        with pytest.raises(DomainError):
            xc.rationalize(np.array([[0.5, 0.1], [0.1, 0.3]]), 2, 8)

    def test_rejects_bad_denominator(self):
        with pytest.raises(DomainError):
            xc.rationalize(np.full((2, 2), 0.25), 2, 9)

    def test_exhausted_retry_budget_reports_error(self):
        with pytest.raises(RationalizationError):
            xc.rationalize(np.full((2, 2), 0.25), 2, 8, max_retries=0)

    def test_flow_fallback_produces_exact_margins(self):
        from extremal_copulas.approximation import _controlled_rounding_2d

        frac = np.array([[0.14, 0.86], [0.86, 0.14]])
        x = _controlled_rounding_2d(frac, np.array([1, 1]), np.array([1, 1]))
        # prefers cells with a genuine fractional part (floor/ceil rounding)
        assert x.sum(axis=0).tolist() == [1, 1]
        assert x.sum(axis=1).tolist() == [1, 1]
        assert x.max() == 1

        rng = np.random.default_rng(0)
        f = rng.random((8, 8))
        need = np.full(8, 3)
        x = _controlled_rounding_2d(f, need.copy(), need.copy())
        assert (x.sum(axis=0) == 3).all() and (x.sum(axis=1) == 3).all()
        assert x.max() <= 1


class TestIntervalPartition:
    def test_diagonal_degenerates_to_cells(self):
        gm = xc.GridMeasure(xc.GridSpec(2, 2), 2, np.array([[1, 0], [0, 1]]))
        ip = xc.interval_partition(gm)
        assert ip.interval(0, (0, 0)) == (F(0), F(1, 2))
        assert ip.interval(1, (1, 1)) == (F(1, 2), F(1))
        # zero-mass cell gets an empty interval
        lo, hi = ip.interval(0, (0, 1))
        assert lo == hi

    def test_uniform_slab_split_lexicographic(self):
        gm = xc.GridMeasure(xc.GridSpec(2, 2), 4, np.ones((2, 2), dtype=int))
        ip = xc.interval_partition(gm)
        assert ip.interval(0, (0, 0)) == (F(0), F(1, 4))
        assert ip.interval(0, (0, 1)) == (F(1, 4), F(1, 2))
        assert ip.interval(0, (1, 0)) == (F(1, 2), F(3, 4))
        assert ip.interval(0, (1, 1)) == (F(3, 4), F(1))

    def test_slab_lengths_fill_exactly(self):
        rng = np.random.default_rng(31)
        gm = random_grid_measure(rng, 5, 2, layers=6)
        ip = xc.interval_partition(gm)
        for axis in range(2):
            for j in range(5):
                total = sum(
                    (ip.interval(axis, cell)[1] - ip.interval(axis, cell)[0]
                     for cell in np.ndindex(5, 5) if cell[axis] == j),
                    start=F(0),
                )
                assert total == F(1, 5)


class TestAssemble:
    def test_diagonal_reproduces_identity_permutation(self):
        gm = xc.GridMeasure(xc.GridSpec(2, 2), 2, np.array([[1, 0], [0, 1]]))
        sm, q = xc.assemble(gm, xc.interval_partition(gm))
        expected = xc.permutation_copula(xc.PermutationCopulaSpec(2, ((0, 1),)))
        assert sm == expected and q == 2

    def test_uniform_four_segments_disjoint_projections(self):
        gm = xc.GridMeasure(xc.GridSpec(2, 2), 4, np.ones((2, 2), dtype=int))
        sm, q = xc.assemble(gm, xc.interval_partition(gm))
        assert len(sm.segments) == 4 and q == 4
        for axis in range(2):
            spans = sorted((s.a[axis], s.b[axis]) for s in sm.segments)
            for (lo0, hi0), (lo1, _) in zip(spans, spans[1:]):
                assert hi0 <= lo1
        assert xc.validate_copula_measure(sm, 4).ok

    def test_output_slabs_uniform_at_order(self):
        rng = np.random.default_rng(40)
        gm = random_grid_measure(rng, 3, 2, layers=4)
        sm, q = xc.assemble(gm, xc.interval_partition(gm))
        assert q == gm.denominator
        assert xc.validate_copula_measure(sm, q).ok


class TestApproximate:
    def test_comonotone_is_reproduced_exactly(self):
        res = xc.approximate(xc.Comonotone(2), 4)
        assert res.lattice_dinf == 0.0

    def test_independence_within_bound(self):
        res = xc.approximate(xc.Independence(2), 16)
        assert res.lattice_dinf <= res.certified_bound == pytest.approx(5 / 16)

    def test_fgm_within_bound_and_far_below(self):
        res = xc.approximate(xc.FGM(1), 16)
        assert res.lattice_dinf <= 5 / 16
        assert res.lattice_dinf < 0.1  # empirically far below the bound

    def test_error_shrinks_with_order(self):
        for model in (xc.Independence(2), xc.FGM(1)):
            coarse = xc.approximate(model, 8).lattice_dinf
            fine = xc.approximate(model, 32).lattice_dinf
            assert fine <= coarse + 1e-12

    def test_output_is_certified_extreme(self):
        res = xc.approximate(xc.FGM(1), 8)
        assert xc.validate_copula_measure(res.measure, 8).ok
        assert xc.functional_cover_check(res.measure, 8).covered

    def test_sub_boxes_stay_inside_cells(self):
        res = xc.approximate(xc.Independence(2), 4)
        m = res.m
        for seg in res.measure.segments:
            cell = tuple(min(int(a * m), m - 1) for a in seg.a)
            for axis in range(2):
                assert F(cell[axis], m) <= seg.a[axis]
                assert seg.b[axis] <= F(cell[axis] + 1, m)

    def test_graph_copula_input(self):
        model = xc.graph_copula(xc.PiecewiseLinearMap.times_mod_one(2))
        res = xc.approximate(model, 8)
        assert res.lattice_dinf <= res.certified_bound

    def test_three_dimensional_pipeline(self):
        res = xc.approximate(xc.Independence(3), 4)
        assert res.certified_bound == pytest.approx(7 / 4)
        assert res.lattice_dinf < 0.2
        assert xc.validate_copula_measure(res.measure, 4).ok
        assert xc.functional_cover_check(res.measure, 8).covered
