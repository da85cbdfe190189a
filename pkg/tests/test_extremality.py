from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import extremal_copulas as xc
from extremal_copulas.errors import DecompositionError, DomainError

from helpers import random_grid_measure

F = Fraction


def constant_density(m=1, n=2):
    values = np.empty((m,) * n, dtype=object)
    values.reshape(-1)[:] = [F(1)] * m ** n
    return xc.GridDensity(xc.GridSpec(n, m), values)


def checkerboard_density():
    values = np.empty((2, 2), dtype=object)
    values[0, 0] = values[1, 1] = F(2)
    values[0, 1] = values[1, 0] = F(0)
    return xc.GridDensity(xc.GridSpec(2, 2), values)


class TestFindDenseSquare:
    def test_constant_density_whole_cube(self):
        sq = xc.find_dense_square(constant_density(), [1])
        assert sq == xc.SquareRegion((F(0), F(0)), F(1))

    def test_checkerboard_fails_at_unit_scale(self):
        assert xc.find_dense_square(checkerboard_density(), [1]) is None

    def test_checkerboard_succeeds_after_refinement(self):
        sq = xc.find_dense_square(checkerboard_density(), [1, F(1, 2)])
        assert sq is not None
        assert sq.edge == F(1, 2)
        assert sq.corner == (F(0), F(0))

    def test_scale_order_respected(self):
        # coarse-to-fine scanning returns the first qualifying scale
        sq = xc.find_dense_square(constant_density(), [F(1, 2), 1])
        assert sq.edge == F(1, 2)


class TestLemmaDecompose:
    def test_constant_density_checkerboard_halves(self):
        sq = xc.SquareRegion((F(0), F(0)), F(1))
        w = xc.lemma_decompose(constant_density(), sq)
        # refined to m=2; perturbation is 1 everywhere on the quarter square
        assert w.h1.spec.m == 2
        assert (w.g == np.array([[F(1)]], dtype=object)).all()
        h1 = w.h1.values
        assert h1[0, 0] == 0 and h1[1, 1] == 0
        assert h1[0, 1] == 2 and h1[1, 0] == 2
        h2 = w.h2.values
        assert h2[0, 0] == 2 and h2[1, 1] == 2
        assert h2[0, 1] == 0 and h2[1, 0] == 0

    def test_checkerboard_hypothesis_violated(self):
        sq = xc.SquareRegion((F(0), F(0)), F(1))
        with pytest.raises(DecompositionError) as err:
            xc.lemma_decompose(checkerboard_density(), sq)
        assert err.value.zero_fraction == F(1, 2)

    def test_halves_have_exact_uniform_marginals(self):
        density = xc.grid_density_from_copula(xc.FGM(1), 4)
        sq = xc.find_dense_square(density, [1])
        w = xc.lemma_decompose(density, sq)
        for h in (w.h1, w.h2):
            for axis in range(2):
                assert h.slice_masses(axis, h.spec.m) == [F(1, h.spec.m)] * h.spec.m

    def test_average_recovers_input_exactly(self):
        density = xc.grid_density_from_copula(xc.FGM(F(-1, 2)), 4)
        sq = xc.find_dense_square(density, [1])
        w = xc.lemma_decompose(density, sq)
        avg = (w.h1.values + w.h2.values) / 2
        assert (avg == w.refined_input.values).all()
        assert not (w.h1.values == w.h2.values).all()


class TestSingularityDiagnostic:
    def test_fgm_density_not_extreme(self):
        verdict = xc.singularity_diagnostic(xc.grid_density_from_copula(xc.FGM(1), 4))
        assert verdict.status == xc.NOT_EXTREME
        assert verdict.witness is not None
        h1, h2 = verdict.halves
        assert h1.ac_weight == 1 and h1.singular is None

    def test_pure_singular_passes(self):
        verdict = xc.singularity_diagnostic(xc.tent_copula(F(1, 2)))
        assert verdict.status == xc.NECESSARY_CONDITION_PASSED
        assert verdict.witness is None

    def test_mixture_not_extreme(self):
        mm = xc.MixedMeasure(
            F(1, 2),
            constant_density(),
            xc.Comonotone(2).as_segments(),
        )
        verdict = xc.singularity_diagnostic(mm)
        assert verdict.status == xc.NOT_EXTREME
        h1, h2 = verdict.halves
        # singular part rides along unchanged; halves stay probability mixtures
        assert h1.singular == mm.singular and h1.ac_weight == F(1, 2)
        u = (F(1, 3), F(3, 4))
        assert (h1.cdf_fraction(u) + h2.cdf_fraction(u)) / 2 == mm.cdf_fraction(u)

    def test_never_not_extreme_for_singular_input(self):
        for sm in (xc.four_line_3d(), xc.permutation_copula(
                xc.PermutationCopulaSpec(3, ((1, 2, 0),)))):
            assert xc.singularity_diagnostic(sm).status == xc.NECESSARY_CONDITION_PASSED


class TestIsFunctionalOver:
    def test_comonotone_graph(self):
        sm = xc.Comonotone(2).as_segments()
        assert xc.is_functional_over(sm, 0, (F(0), F(1)))

    def test_tent_second_axis_overlaps(self):
        sm = xc.tent_copula(F(1, 2))
        assert not xc.is_functional_over(sm, 1, (F(0), F(1)))
        assert xc.is_functional_over(sm, 0, (F(0), F(1)))

    def test_four_line_every_axis_conflicts(self):
        sm = xc.four_line_3d()
        for axis in range(3):
            assert not xc.is_functional_over(sm, axis, (F(0), F(1)))

    def test_collinear_segments_do_not_conflict(self):
        sm = xc.SegmentMeasure([
            xc.Segment((F(0), F(0)), (F(1, 2), F(1, 2)), F(1, 2)),
            xc.Segment((F(1, 4), F(1, 4)), (F(1), F(1)), F(1, 2)),
        ])
        assert xc.is_functional_over(sm, 0, (F(0), F(1)))

    def test_orthogonal_segment_breaks_functionality(self):
        sm = xc.SegmentMeasure([
            xc.Segment((F(1, 2), F(0)), (F(1, 2), F(1)), F(1, 2)),
            xc.Segment((F(0), F(0)), (F(1), F(1)), F(1, 2)),
        ])
        assert not xc.is_functional_over(sm, 0, (F(0), F(1)))
        # outside the orthogonal segment's slab the support is a graph
        assert xc.is_functional_over(sm, 0, (F(0), F(1, 4)))

    def test_monotone_under_shrinking(self):
        rng = np.random.default_rng(9)
        sm = xc.four_line_3d()
        for _ in range(50):
            axis = int(rng.integers(0, 3))
            r = 8
            cells = sorted(rng.choice(r, size=rng.integers(1, r), replace=False))
            big = [(F(int(j), r), F(int(j) + 1, r)) for j in cells]
            small = [iv for iv in big if rng.random() < 0.5]
            if xc.is_functional_over(sm, axis, big):
                assert xc.is_functional_over(sm, axis, small or [big[0]])


class TestFunctionalCoverCheck:
    def test_tent_covered_by_first_axis(self):
        cert = xc.functional_cover_check(xc.tent_copula(F(1, 2)), 8)
        assert cert.covered
        assert cert.axis_intervals[0] == ((F(0), F(1)),)

    def test_four_line_not_covered(self):
        cert = xc.functional_cover_check(xc.four_line_3d(), 8)
        assert not cert.covered
        assert all(not b for b in cert.axis_intervals)

    def test_permutation_copulas_covered(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            m = int(rng.integers(1, 9))
            perms = (tuple(int(v) for v in rng.permutation(m)),)
            sm = xc.permutation_copula(xc.PermutationCopulaSpec(m, perms))
            cert = xc.functional_cover_check(sm, 8)
            assert cert.covered
            assert cert.axis_intervals[0] == ((F(0), F(1)),)

    def test_covered_implies_valid_copula(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            m = int(rng.integers(1, 7))
            sm = xc.permutation_copula(
                xc.PermutationCopulaSpec(m, (tuple(int(v) for v in rng.permutation(m)),))
            )
            if xc.functional_cover_check(sm, 8).covered:
                assert xc.validate_copula_measure(sm, m).ok

    def test_power_of_two_required(self):
        with pytest.raises(DomainError):
            xc.functional_cover_check(xc.tent_copula(F(1, 2)), 6)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 10**6),
    m=st.sampled_from([2, 4]),
    layers=st.integers(2, 6),
)
def test_decomposition_property_random_densities(seed, m, layers):
    """(h1+h2)/2 == input exactly, h1 != input, both halves valid."""
    rng = np.random.default_rng(seed)
    gm = random_grid_measure(rng, m, 2, layers=layers)
    density = gm.to_density()
    edge = F(1, m)  # one original cell, refined once if needed
    scales = []
    e = F(1)
    while e >= edge:
        scales.append(e)
        e /= 2
    square = xc.find_dense_square(density, scales)
    # a positive cell always exists, so the finest scale must succeed
    assert square is not None
    w = xc.lemma_decompose(density, square)
    avg = (w.h1.values + w.h2.values) / 2
    assert (avg == w.refined_input.values).all()
    assert not (w.h1.values == w.refined_input.values).all()
    for h in (w.h1, w.h2):
        mm = h.spec.m
        for axis in range(2):
            assert h.slice_masses(axis, mm) == [F(1, mm)] * mm
