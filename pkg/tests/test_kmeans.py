import itertools

import numpy as np
import pytest

from gkmnc.errors import DimensionMismatch, EmptyCentroidList, KExceedsRows, SingleCluster
from gkmnc.kmeans import ClusterModel, assign, davies_bouldin, kmeans_fit, select_k


def exhaustive_two_partition_sse(rows):
    """Oracle: best SSE over all 2-partitions of a small 1-D point set."""
    best = np.inf
    n = len(rows)
    for size in range(1, n):
        for members in itertools.combinations(range(n), size):
            a = rows[list(members)]
            b = rows[[i for i in range(n) if i not in members]]
            sse = ((a - a.mean(axis=0)) ** 2).sum() + ((b - b.mean(axis=0)) ** 2).sum()
            best = min(best, sse)
    return best


def direct_dbi(rows, centroids, assignments):
    """Oracle: Davies-Bouldin by the direct formula, triple loop."""
    k = len(centroids)
    s = [
        np.mean([np.linalg.norm(rows[i] - centroids[j]) for i in range(len(rows)) if assignments[i] == j])
        for j in range(k)
    ]
    total = 0.0
    for i in range(k):
        worst = 0.0
        for j in range(k):
            if i == j:
                continue
            m = np.linalg.norm(centroids[i] - centroids[j])
            worst = max(worst, (s[i] + s[j]) / m)
        total += worst
    return total / k


class TestFit:
    def test_two_pairs_on_a_line(self):
        rows = np.array([[0.0], [1.0], [9.0], [10.0]])
        model = kmeans_fit(rows, 2, seed=0)
        assert model.within_cluster_sse == pytest.approx(
            exhaustive_two_partition_sse(rows)
        )
        assert model.within_cluster_sse == pytest.approx(1.0)
        assert model.centroids.ravel().tolist() == pytest.approx([0.5, 9.5])

    def test_k1_centroid_is_mean(self):
        rows = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 0.0]])
        model = kmeans_fit(rows, 1, seed=0)
        assert np.allclose(model.centroids[0], rows.mean(axis=0))
        assert model.dbi is None

    def test_k_equals_rows(self):
        rows = np.array([[0.0], [5.0], [9.0]])
        model = kmeans_fit(rows, 3, seed=0)
        assert model.within_cluster_sse == pytest.approx(0.0)
        assert sorted(model.centroids.ravel().tolist()) == [0.0, 5.0, 9.0]

    def test_k_exceeds_rows(self):
        with pytest.raises(KExceedsRows):
            kmeans_fit(np.zeros((3, 1)), 4, seed=0)

    def test_duplicate_points_guard(self):
        rows = np.array([[1.0], [1.0], [1.0], [1.0]])
        with pytest.raises(KExceedsRows):
            kmeans_fit(rows, 2, seed=0)

    def test_sse_trace_non_increasing(self):
        rng = np.random.default_rng(3)
        rows = rng.normal(size=(120, 3))
        model = kmeans_fit(rows, 4, seed=1)
        trace = model.sse_trace
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))

    def test_no_empty_clusters(self):
        rng = np.random.default_rng(9)
        rows = rng.normal(size=(50, 2))
        for k in (2, 3, 5, 7):
            model = kmeans_fit(rows, k, seed=2)
            assert sorted(set(model.assignments.tolist())) == list(range(k))

    def test_deterministic_for_seed(self):
        rng = np.random.default_rng(4)
        rows = rng.normal(size=(60, 2))
        a = kmeans_fit(rows, 3, seed=7)
        b = kmeans_fit(rows, 3, seed=7)
        assert np.array_equal(a.centroids, b.centroids)
        assert np.array_equal(a.assignments, b.assignments)

    def test_row_permutation_invariance(self):
        # integer-valued rows keep the centroid means exact under reordering
        rng = np.random.default_rng(11)
        rows = rng.integers(-20, 20, size=(40, 2)).astype(float)
        perm = rng.permutation(40)
        a = kmeans_fit(rows, 3, seed=5)
        b = kmeans_fit(rows[perm], 3, seed=5)
        assert np.array_equal(a.centroids, b.centroids)
        assert np.array_equal(b.assignments, a.assignments[perm])

    def test_centroids_canonically_ordered(self):
        rng = np.random.default_rng(6)
        rows = rng.normal(size=(30, 2))
        model = kmeans_fit(rows, 4, seed=3)
        view = [tuple(c) for c in model.centroids]
        assert view == sorted(view)


class TestAssign:
    def test_closest_centroid(self):
        centroids = np.array([[1.0, 0.0], [5.0, 5.0]])
        assert assign(centroids, np.array([0.0, 0.0])) == 0

    def test_single_centroid(self):
        assert assign(np.array([[2.0, 2.0]]), np.array([100.0, -3.0])) == 0

    def test_tie_breaks_to_lowest_index(self):
        centroids = np.array([[-1.0], [1.0]])
        assert assign(centroids, np.array([0.0])) == 0

    def test_self_routing(self):
        rng = np.random.default_rng(8)
        rows = rng.normal(size=(40, 3))
        model = kmeans_fit(rows, 5, seed=1)
        for j, c in enumerate(model.centroids):
            assert assign(model.centroids, c) == j

    def test_errors(self):
        with pytest.raises(EmptyCentroidList):
            assign(np.empty((0, 2)), np.zeros(2))
        with pytest.raises(DimensionMismatch):
            assign(np.zeros((2, 2)), np.zeros(3))


class TestDaviesBouldin:
    def hand_model(self):
        rows = np.array([[0.0], [2.0], [10.0], [12.0]])
        return rows, ClusterModel(
            k=2,
            centroids=np.array([[1.0], [11.0]]),
            assignments=np.array([0, 0, 1, 1]),
            within_cluster_sse=4.0,
            dbi=None,
        )

    def test_hand_oracle(self):
        rows, model = self.hand_model()
        # S = (1, 1), M = 10, DBI = (1+1)/10
        assert davies_bouldin(rows, model) == pytest.approx(0.2, abs=1e-10)

    def test_singleton_clusters(self):
        rows = np.array([[0.0], [5.0]])
        model = ClusterModel(
            k=2,
            centroids=rows.copy(),
            assignments=np.array([0, 1]),
            within_cluster_sse=0.0,
            dbi=None,
        )
        assert davies_bouldin(rows, model) == 0.0

    def test_single_cluster_rejected(self):
        rows = np.array([[0.0], [1.0]])
        model = kmeans_fit(rows, 1, seed=0)
        with pytest.raises(SingleCluster):
            davies_bouldin(rows, model)

    def test_matches_direct_formula_on_random_instances(self):
        rng = np.random.default_rng(10)
        for _ in range(12):
            n = int(rng.integers(10, 100))
            d = int(rng.integers(1, 4))
            k = int(rng.integers(2, 6))
            rows = rng.normal(size=(n, d))
            model = kmeans_fit(rows, k, seed=int(rng.integers(1000)))
            oracle = direct_dbi(rows, model.centroids, model.assignments)
            assert model.dbi == pytest.approx(oracle, abs=1e-10)


class TestSelectK:
    def test_two_blobs_pick_two(self):
        rng = np.random.default_rng(12)
        rows = np.vstack(
            [rng.normal(-100.0, 1.0, size=(40, 2)), rng.normal(100.0, 1.0, size=(40, 2))]
        )
        chosen, curve = select_k(rows, k_max=4, seed=0)
        assert chosen.k == 2
        dbi = dict(curve)
        assert dbi[2] < dbi[3] and dbi[2] < dbi[4]

    def test_curve_covers_requested_range(self):
        rng = np.random.default_rng(13)
        rows = rng.normal(size=(60, 2))
        _, curve = select_k(rows, k_max=6, seed=0)
        assert [k for k, _ in curve] == [2, 3, 4, 5, 6]

    def test_all_identical_rows_degenerate(self):
        rows = np.ones((10, 2))
        with pytest.raises(KExceedsRows):
            select_k(rows, k_max=3, seed=0)
