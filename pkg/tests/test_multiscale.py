"""Safe projections, interval preimages, and the partition identity."""

import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from sinegordon.tree_core import ModelParams, dipole
from sinegordon.moment_diagrams import build_diagram
from sinegordon.multiscale import (ScaleAssignment, safe_projection,
                                   preimage_interval, harvest_cuts,
                                   organize_and_check, generalized_edges,
                                   scale_floor_ok)

P54 = ModelParams.from_beta_bar(Fraction(5, 4))
D2 = build_diagram(dipole(), 1, P54)


def assignment_from(values: list[int]) -> ScaleAssignment:
    edges = generalized_edges(D2)
    return ScaleAssignment(dict(zip(edges, values)))


class TestSafeProjection:
    def test_projection_is_subset_and_idempotent_on_image(self):
        rng = random.Random(0)
        for _ in range(200):
            n = ScaleAssignment.random_assignment(D2, 4, rng)
            for F in D2.enumerate_forests():
                img = safe_projection(D2, F, n)
                assert img <= frozenset(F)
                assert safe_projection(D2, img, n) == img

    def test_constant_assignment_keeps_everything(self):
        n = ScaleAssignment.constant(D2, 2)
        F = frozenset(D2.divergent_subtrees())
        assert safe_projection(D2, F, n) == F


class TestIntervalPreimage:
    def test_preimages_partition_the_forest_lattice(self):
        rng = random.Random(1)
        forests = D2.enumerate_forests()
        for _ in range(100):
            n = ScaleAssignment.random_assignment(D2, 4, rng)
            images = {safe_projection(D2, F, n) for F in forests}
            covered = 0
            for img in images:
                interval = preimage_interval(D2, img, n, forests)
                assert interval is not None
                assert interval.lower == img
                covered += len(interval.members(forests))
            assert covered == len(forests)

    @given(st.lists(st.integers(0, 4), min_size=len(generalized_edges(D2)),
                    max_size=len(generalized_edges(D2))))
    @settings(max_examples=200, deadline=None)
    def test_interval_property_hypothesis(self, values):
        n = assignment_from(values)
        for F in D2.enumerate_forests():
            img = safe_projection(D2, F, n)
            interval = preimage_interval(D2, img, n)
            assert interval is not None and F in interval


class TestPartitionIdentity:
    def test_random_assignments(self):
        rng = random.Random(2)
        for _ in range(150):
            n = ScaleAssignment.random_assignment(D2, 4, rng)
            rep = organize_and_check(D2, n)
            assert rep.ok, rep.failures
            assert rep.n_pairs == 9

    def test_harvest_cuts_subset_of_cut_sites(self):
        rng = random.Random(3)
        sites = set(D2.cut_sites())
        for _ in range(100):
            n = ScaleAssignment.random_assignment(D2, 4, rng)
            for F in D2.enumerate_forests():
                assert set(harvest_cuts(D2, F, n)) <= sites


class TestScaleFloor:
    def test_floor_check(self):
        lo = ScaleAssignment.constant(D2, 0)
        hi = ScaleAssignment.constant(D2, 3)
        assert scale_floor_ok(D2, hi, 2)
        assert not scale_floor_ok(D2, lo, 1)
