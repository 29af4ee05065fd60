import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memgc.vecmath import (
    cosine,
    covering_radius,
    largest_remainder,
    normalize,
    pairwise_similarity,
    retention_count,
    round_half_up,
    spherical_kmeans,
)

from .oracles import best_two_partition, cos, unit_rows


class TestNormalize:
    def test_unit_is_fixed_point(self):
        np.testing.assert_array_equal(normalize([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])

    def test_three_four_five(self):
        np.testing.assert_allclose(normalize([3.0, 4.0]), [0.6, 0.8], atol=1e-15)

    def test_zero_norm(self):
        with pytest.raises(ValueError, match="zero-norm"):
            normalize([0.0, 0.0])

    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=16).filter(lambda v: np.linalg.norm(v) > 1e-6))
    def test_unit_norm(self, v):
        assert abs(np.linalg.norm(normalize(v)) - 1.0) <= 1e-12


class TestCosine:
    def test_self(self):
        u = normalize([0.3, -0.2, 0.9])
        assert cosine(u, u) == pytest.approx(1.0, abs=1e-15)

    def test_orthonormal(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_arithmetic(self):
        assert cosine([0.6, 0.8], [0.8, 0.6]) == pytest.approx(0.96, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            cosine([1.0, 0.0], [1.0, 0.0, 0.0])


class TestPairwise:
    def test_single(self):
        np.testing.assert_array_equal(pairwise_similarity([[0.0, 1.0]]), [[1.0]])

    def test_identical(self):
        v = normalize([1.0, 2.0, 3.0])
        np.testing.assert_allclose(pairwise_similarity([v, v]), np.ones((2, 2)), atol=1e-15)

    def test_matches_per_pair_oracle(self, rng):
        x = unit_rows(rng, 4, 5)
        s = pairwise_similarity(x)
        for i in range(4):
            for j in range(4):
                expect = 1.0 if i == j else cos(x[i], x[j])
                assert s[i, j] == pytest.approx(expect, abs=1e-12)

    def test_symmetric_unit_diagonal(self, rng):
        s = pairwise_similarity(unit_rows(rng, 30, 7))
        assert np.array_equal(s, s.T)
        assert np.all(np.diagonal(s) == 1.0)

    def test_empty(self):
        with pytest.raises(ValueError):
            pairwise_similarity(np.zeros((0, 3)))


class TestRounding:
    @pytest.mark.parametrize("x,expect", [(0.5, 1), (1.5, 2), (2.4999, 2), (7.000000000000001, 7), (28.999999999999996, 29)])
    def test_round_half_up(self, x, expect):
        assert round_half_up(x) == expect

    @pytest.mark.parametrize("n,ratio,expect", [(100, 0.7, 70), (3, 0.34, 1), (10, 0.01, 1), (5, 1.0, 5), (0, 0.5, 0)])
    def test_retention_count(self, n, ratio, expect):
        assert retention_count(n, ratio) == expect

    def test_largest_remainder_hits_total(self):
        out = largest_remainder([2.7, 1.2, 0.1], 4)
        assert out.tolist() == [3, 1, 0]

    def test_largest_remainder_ties_to_lower_index(self):
        assert largest_remainder([0.5, 0.5], 1).tolist() == [1, 0]

    def test_largest_remainder_tie_key(self):
        assert largest_remainder([0.5, 0.5], 1, tie_key=[0, 1]).tolist() == [0, 1]

    def test_capacity(self):
        assert largest_remainder([1.9, 0.1], 2, capacity=[1, 5]).tolist() == [1, 1]

    @given(st.lists(st.floats(0, 50), min_size=1, max_size=12), st.integers(0, 3))
    def test_sum_exact(self, shares, extra):
        total = int(np.floor(sum(shares))) + min(extra, len(shares) - 1)
        total = max(total, int(sum(np.floor(np.asarray(shares) + 1e-9))))
        out = largest_remainder(shares, total)
        assert out.sum() == total


class TestKMeans:
    def test_single_cluster(self, rng):
        x = unit_rows(rng, 12, 4)
        res = spherical_kmeans(x, 1, seed=0)
        assert set(res.assignments.tolist()) == {0}
        mean = x.mean(axis=0)
        np.testing.assert_allclose(res.centroids[0], mean / np.linalg.norm(mean), atol=1e-12)

    def test_each_point_own_cluster(self, rng):
        x = unit_rows(rng, 9, 4)
        res = spherical_kmeans(x, 9, seed=0)
        assert sorted(res.assignments.tolist()) == list(range(9))

    def test_antipodal_caps_match_exhaustive_optimum(self, rng):
        pole = np.array([0.0, 0.0, 1.0])
        pts = []
        for sign in (1, -1):
            for _ in range(4):
                v = sign * pole + 0.2 * rng.standard_normal(3)
                pts.append(v / np.linalg.norm(v))
        pts = np.array(pts)
        labels = spherical_kmeans(pts, 2, seed=3).assignments
        best = np.array(best_two_partition(pts))
        # same partition up to label swap
        assert np.array_equal(labels == labels[0], best == best[0])
        assert np.array_equal(best, [0, 0, 0, 0, 1, 1, 1, 1])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 60), st.integers(1, 8))
    def test_invariants_and_reproducible(self, seed, n, k):
        k = min(k, n)
        x = unit_rows(np.random.default_rng(seed), n, 6)
        a = spherical_kmeans(x, k, seed=seed, debug=True)
        b = spherical_kmeans(x, k, seed=seed)
        assert np.array_equal(a.assignments, b.assignments)
        assert a.assignments.max() < k
        assert np.bincount(a.assignments, minlength=k).min() >= 1
        np.testing.assert_allclose(np.linalg.norm(a.centroids, axis=1), 1.0, atol=1e-9)

    def test_duplicates_still_no_empty_cluster(self):
        x = np.tile(normalize([1.0, 2.0]), (6, 1))
        res = spherical_kmeans(x, 4, seed=1)
        assert np.bincount(res.assignments, minlength=4).min() >= 1

    def test_bad_cluster_count(self, rng):
        with pytest.raises(ValueError):
            spherical_kmeans(unit_rows(rng, 3, 2), 4)
        with pytest.raises(ValueError):
            spherical_kmeans(np.zeros((0, 2)), 1)


def test_covering_radius_matches_brute_force(rng):
    p = unit_rows(rng, 40, 5)
    r = p[::7]
    expect = max(min(np.linalg.norm(a - b) for b in r) for a in p)
    assert covering_radius(p, r) == pytest.approx(expect, abs=1e-7)
