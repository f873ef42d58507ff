import io
from itertools import combinations, permutations

import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import squareform
from sklearn.metrics import adjusted_rand_score, silhouette_score

from qlustering.validation import (
    ContingencyTable,
    adjusted_rand_index,
    average_linkage,
    compactness,
    consensus,
    consensus_clusters,
    cut_tree,
    dunn_index,
    embed,
    hungarian,
    match_fraction,
    rand_index,
    read_matrix_csv,
    read_metrics_csv,
    silhouette,
    stability,
    write_matrix_csv,
    write_metrics_csv,
)


def brute_rand(a, b):
    pairs = list(combinations(range(len(a)), 2))
    agree = sum((a[i] == a[j]) == (b[i] == b[j]) for i, j in pairs)
    return agree / len(pairs)


def test_contingency_table():
    t = ContingencyTable.from_partitions([1, 1, 2, 2, 2], [5, 6, 6, 6, 5])
    assert np.array_equal(t.counts, [[1, 1], [1, 2]])
    assert t.total == 5
    assert np.array_equal(t.row_sums, [2, 3]) and np.array_equal(t.col_sums, [2, 3])


def test_rand_index_examples():
    assert rand_index([1, 1, 2, 2], [1, 1, 2, 2]) == 1.0
    assert rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(1 / 3, abs=1e-15)
    assert rand_index([1, 1, 2, 2, 3], [2, 2, 3, 3, 1]) == 1.0
    with pytest.raises(ValueError):
        rand_index([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        rand_index([1], [1])


def test_ari_examples():
    assert adjusted_rand_index([1, 1, 2, 2], [1, 1, 2, 2]) == 1.0
    assert adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5, abs=1e-15)
    # both partitions trivial: denominator vanishes
    assert adjusted_rand_index([1, 1, 1], [2, 2, 2]) == 1.0
    assert adjusted_rand_index([1, 2, 3], [1, 2, 3]) == 1.0
    assert adjusted_rand_index([1, 1, 1], [1, 2, 3]) == 0.0
    with pytest.raises(ValueError):
        adjusted_rand_index([1, 2], [1])


def test_rand_and_ari_against_independent_references():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = rng.integers(2, 30)
        a = rng.integers(1, 5, n)
        b = rng.integers(1, 4, n)
        assert rand_index(a, b) == pytest.approx(brute_rand(a, b), abs=1e-12)
        assert adjusted_rand_index(a, b) == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)


def test_ari_of_random_relabelings_is_near_zero():
    rng = np.random.default_rng(1)
    truth = np.repeat([1, 2, 3, 4], 25)
    vals = [adjusted_rand_index(truth, rng.permutation(truth)) for _ in range(1000)]
    assert abs(np.mean(vals)) < 0.05


def test_compactness_examples():
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert compactness(x, [1, 1]) == pytest.approx(1.0)
    assert compactness(x, [1, 2]) == 0.0
    with pytest.raises(ValueError):
        compactness(x, [1])


def test_dunn_examples():
    x = np.array([[0.0], [1.0], [10.0], [11.0]])
    assert dunn_index(x, [1, 1, 2, 2]) == pytest.approx(9.0)
    with pytest.raises(ValueError):
        dunn_index(x, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        dunn_index(x, [1, 1, 1, 1])


def test_dunn_drops_when_separated_clusters_merge():
    rng = np.random.default_rng(2)
    centers = np.array([[0, 0], [10, 0], [0, 10]])
    x = np.vstack([c + 0.3 * rng.standard_normal((8, 2)) for c in centers])
    labels = np.repeat([1, 2, 3], 8)
    merged = np.where(labels == 3, 2, labels)
    assert dunn_index(x, merged) < dunn_index(x, labels)


def test_silhouette_examples():
    eps = 1e-6
    x = np.array([[0.0], [eps], [10.0], [10.0 + eps]])
    assert silhouette(x, [1, 1, 2, 2]) == pytest.approx(1.0, abs=1e-6)
    rng = np.random.default_rng(3)
    y = rng.standard_normal((200, 3))
    assert abs(silhouette(y, rng.integers(1, 4, 200))) < 0.1
    with pytest.raises(ValueError):
        silhouette(x, [1, 1, 1, 1])


def test_silhouette_against_sklearn_and_singletons():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((30, 4))
    lab = rng.integers(1, 4, 30)
    assert silhouette(x, lab) == pytest.approx(silhouette_score(x, lab), abs=1e-12)
    lab[0] = 9  # singleton scores 0, as in the reference
    assert silhouette(x, lab) == pytest.approx(silhouette_score(x, lab), abs=1e-12)


def test_embed_complex_vectors():
    z = np.array([[1 + 1j, 0], [0, 1j]])
    assert embed(z).shape == (2, 4)
    assert embed(np.array([[1 + 0j, 0]])).dtype == float


def test_hungarian_examples():
    cost = 1.0 - np.eye(4)
    assert np.array_equal(hungarian(cost), np.arange(4))
    assert np.array_equal(hungarian([[1, 0], [0, 1]]), [1, 0])
    with pytest.raises(ValueError):
        hungarian(np.zeros((2, 3)))


def test_hungarian_against_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(20):
        cost = rng.random((5, 5))
        best = min(sum(cost[i, p[i]] for i in range(5)) for p in permutations(range(5)))
        perm = hungarian(cost)
        assert sum(cost[i, perm[i]] for i in range(5)) == pytest.approx(best, abs=1e-12)


def test_stability_examples():
    assert stability([[1, 1, 2, 2], [1, 1, 2, 2], [1, 1, 2, 2]]) == 1.0
    assert stability([[1, 1, 2, 2], [2, 2, 1, 1]]) == 1.0
    assert stability([[1, 1, 2, 2], [1, 2, 2, 2]]) == 0.75
    # unequal cluster counts are padded
    assert match_fraction([1, 1, 2, 3], [1, 1, 1, 1]) == 0.5
    with pytest.raises(ValueError):
        stability([[1, 2]])


def test_consensus_examples():
    C = consensus([[1, 1, 2], [1, 1, 2]])
    assert np.array_equal(C, [[1, 1, 0], [1, 1, 0], [0, 0, 1]])
    C = consensus([[1, 1, 2], [1, 2, 2]])
    assert C[0, 1] == 0.5 and C[1, 2] == 0.5 and C[0, 2] == 0.0
    assert np.array_equal(C, C.T) and np.all(np.diag(C) == 1)


def test_consensus_clusters_examples():
    C = np.array([[1, 0.9, 0.1], [0.9, 1, 0.1], [0.1, 0.1, 1]])
    assert np.array_equal(consensus_clusters(C, 2), [1, 1, 2])
    blocks = np.repeat([1, 2, 3], [4, 3, 5])
    Cb = (blocks[:, None] == blocks[None, :]).astype(float)
    assert adjusted_rand_index(consensus_clusters(Cb, 3), blocks) == 1.0
    with pytest.raises(ValueError):
        consensus_clusters(C, 4)
    # groups never separated by any run stay whole
    one_run = consensus([[1, 1, 2, 2, 2]])
    assert np.array_equal(consensus_clusters(one_run, 4), [1, 1, 2, 2, 2])


def naive_average_linkage(d):
    clusters = [[i] for i in range(len(d))]
    heights = []
    while len(clusters) > 1:
        best = None
        for a, b in combinations(range(len(clusters)), 2):
            dist = np.mean([d[i, j] for i in clusters[a] for j in clusters[b]])
            if best is None or dist < best[0] - 1e-12:
                best = (dist, a, b)
        dist, a, b = best
        heights.append(dist)
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]
    return heights


def test_upgma_against_exhaustive_and_scipy():
    rng = np.random.default_rng(6)
    for _ in range(10):
        pts = rng.random((8, 2))
        d = np.linalg.norm(pts[:, None] - pts[None], axis=2)
        ours = [m[2] for m in average_linkage(d)]
        assert np.allclose(ours, naive_average_linkage(d), atol=1e-12)
        ref = linkage(squareform(d, checks=False), method="average")
        assert np.allclose(ours, ref[:, 2], atol=1e-12)
        assert [m[3] for m in average_linkage(d)] == ref[:, 3].astype(int).tolist()


def test_upgma_ties_merge_lowest_pair_first():
    d = np.ones((4, 4)) - np.eye(4)
    merges = average_linkage(d)
    assert merges[0][:2] == (0, 1)
    assert np.array_equal(cut_tree(merges, 4, 3), [1, 1, 2, 3])


def test_consensus_clusters_permutation_equivariant():
    # tie-free input; with ties the index-order tie-break picks by position
    rng = np.random.default_rng(7)
    A = rng.random((12, 12))
    C = (A + A.T) / 2
    np.fill_diagonal(C, 1.0)
    base = consensus_clusters(C, 3)
    perm = rng.permutation(12)
    moved = consensus_clusters(C[np.ix_(perm, perm)], 3)
    assert adjusted_rand_index(moved, base[perm]) == 1.0


def test_csv_round_trips():
    rows = [("RI", 0.25, "0"), ("ARI", -1 / 3, "mean"), ("DVI", float("nan"), "1")]
    back = read_metrics_csv(io.StringIO(write_metrics_csv(rows)))
    assert back[:2] == rows[:2] and np.isnan(back[2][1])
    M = np.random.default_rng(8).random((4, 4))
    assert np.array_equal(read_matrix_csv(io.StringIO(write_matrix_csv(M))), M)
