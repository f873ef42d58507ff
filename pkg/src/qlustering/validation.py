"""External and internal clustering scores, run stability and consensus clustering."""

import csv
import io
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist
from scipy.special import comb


def _pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"partitions must be 1-D and of equal length, got {a.shape} and {b.shape}")
    return a, b


@dataclass
class ContingencyTable:
    counts: np.ndarray
    row_labels: np.ndarray
    col_labels: np.ndarray

    @classmethod
    def from_partitions(cls, a, b):
        a, b = _pair(a, b)
        ra, ia = np.unique(a, return_inverse=True)
        rb, ib = np.unique(b, return_inverse=True)
        counts = np.zeros((ra.size, rb.size), dtype=np.int64)
        np.add.at(counts, (ia, ib), 1)
        return cls(counts, ra, rb)

    @property
    def row_sums(self):
        return self.counts.sum(axis=1)

    @property
    def col_sums(self):
        return self.counts.sum(axis=0)

    @property
    def total(self):
        return int(self.counts.sum())


def _pair_counts(a, b):
    t = ContingencyTable.from_partitions(a, b)
    both = comb(t.counts, 2).sum()
    same_a = comb(t.row_sums, 2).sum()
    same_b = comb(t.col_sums, 2).sum()
    return both, same_a, same_b, comb(t.total, 2)


def rand_index(a, b):
    """Fraction of point pairs on which the two partitions agree."""
    a, b = _pair(a, b)
    if a.size < 2:
        raise ValueError("rand index needs at least two points")
    both, same_a, same_b, total = _pair_counts(a, b)
    agree = total - same_a - same_b + 2 * both
    return float(agree / total)


def adjusted_rand_index(a, b):
    """Hubert-Arabie chance-corrected Rand index."""
    a, b = _pair(a, b)
    if a.size < 2:
        return 1.0 if np.array_equal(a, b) else 0.0
    both, same_a, same_b, total = (int(x) for x in _pair_counts(a, b))
    # scaled by 2 * total so everything stays an exact integer until the last division
    num = 2 * (both * total - same_a * same_b)
    denom = (same_a + same_b) * total - 2 * same_a * same_b
    if denom == 0:
        # both partitions trivial (all-one-cluster or all-singletons)
        return 1.0 if rand_index(a, b) == 1.0 else 0.0
    return num / denom


def embed(points):
    """Real embedding of complex state vectors: real parts followed by imaginary parts."""
    x = np.asarray(getattr(points, "vectors", points))
    if np.iscomplexobj(x):
        if np.allclose(x.imag, 0):
            return x.real.astype(float)
        return np.hstack([x.real, x.imag])
    return x.astype(float)


def _groups(labels):
    labels = np.asarray(labels)
    return [np.flatnonzero(labels == k) for k in np.unique(labels)]


def compactness(points, labels):
    """Sum of squared distances from each point to its cluster centroid."""
    x = embed(points)
    labels = np.asarray(labels)
    if labels.shape != (x.shape[0],):
        raise ValueError("one label per point required")
    total = 0.0
    for idx in _groups(labels):
        c = x[idx].mean(axis=0)
        total += float(np.sum((x[idx] - c) ** 2))
    return total


def dunn_index(points, labels):
    """Smallest between-cluster point distance over the largest cluster diameter."""
    x = embed(points)
    groups = _groups(labels)
    if len(groups) < 2:
        raise ValueError("Dunn index needs at least two clusters")
    dist = cdist(x, x)
    diameter = max(dist[np.ix_(g, g)].max() for g in groups)
    if diameter == 0:
        raise ValueError("Dunn index undefined: every cluster has zero diameter")
    separation = min(dist[np.ix_(g, h)].min() for g, h in combinations(groups, 2))
    return float(separation / diameter)


def silhouette(points, labels):
    """Mean silhouette width; points in singleton clusters score 0."""
    x = embed(points)
    labels = np.asarray(labels)
    groups = _groups(labels)
    if len(groups) < 2:
        raise ValueError("silhouette needs at least two clusters")
    dist = cdist(x, x)
    n = x.shape[0]
    # mean distance from each point to each cluster
    means = np.column_stack([dist[:, g].sum(axis=1) for g in groups])
    sizes = np.array([g.size for g in groups], dtype=float)
    own = np.searchsorted(np.unique(labels), labels)
    own_size = sizes[own]
    s = np.zeros(n)
    for i in range(n):
        if own_size[i] < 2:
            continue
        a = means[i, own[i]] / (own_size[i] - 1)
        other = np.delete(means[i] / sizes, own[i])
        b = other.min()
        m = max(a, b)
        s[i] = 0.0 if m == 0 else (b - a) / m
    return float(s.mean())


def hungarian(cost):
    """Permutation ``perm`` minimizing ``sum(cost[i, perm[i]])``."""
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"hungarian needs a square cost matrix, got shape {cost.shape}")
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=int)
    perm[rows] = cols
    return perm


def match_fraction(a, b):
    """Fraction of points whose labels agree after optimal relabeling of ``b``."""
    a, b = _pair(a, b)
    t = ContingencyTable.from_partitions(a, b)
    k = max(t.counts.shape)
    square = np.zeros((k, k))
    square[: t.counts.shape[0], : t.counts.shape[1]] = t.counts
    perm = hungarian(-square)
    return float(square[np.arange(k), perm].sum() / a.size)


def stability(runs):
    """Mean pairwise aligned agreement over an ensemble of partitions."""
    runs = [np.asarray(r) for r in runs]
    if len(runs) < 2:
        raise ValueError("stability needs at least two runs")
    if len({r.shape for r in runs}) != 1:
        raise ValueError("all runs must label the same points")
    pairs = list(combinations(range(len(runs)), 2))
    return float(np.mean([match_fraction(runs[i], runs[j]) for i, j in pairs]))


def consensus(runs):
    """Co-clustering frequency matrix of an ensemble."""
    runs = np.asarray([np.asarray(r) for r in runs])
    if runs.ndim != 2:
        raise ValueError("all runs must label the same points")
    same = runs[:, :, None] == runs[:, None, :]
    return same.mean(axis=0)


def average_linkage(distance):
    """UPGMA merge sequence on a dense distance matrix.

    Returns a list of ``(a, b, dist, size)`` merges in the scipy convention
    (new cluster ids start at ``n``). Among equal distances, the pair of
    active clusters with the lexicographically smallest (min member, ...)
    index ordering is merged first; active clusters are kept in order of
    their smallest member.
    """
    d = np.array(distance, dtype=float)
    n = d.shape[0]
    if d.shape != (n, n):
        raise ValueError("distance matrix must be square")
    active = list(range(n))
    ids = list(range(n))
    sizes = [1] * n
    work = d.copy()
    np.fill_diagonal(work, np.inf)
    merges = []
    next_id = n
    while len(active) > 1:
        sub = work[np.ix_(active, active)]
        flat = int(np.argmin(np.triu(sub, 1) + np.tril(np.full_like(sub, np.inf))))
        i, j = divmod(flat, len(active))
        ai, aj = active[i], active[j]
        dist = sub[i, j]
        si, sj = sizes[ai], sizes[aj]
        merged = (si * work[ai] + sj * work[aj]) / (si + sj)
        work[ai] = merged
        work[:, ai] = merged
        work[ai, ai] = np.inf
        merges.append((ids[ai], ids[aj], float(dist), si + sj))
        sizes[ai] = si + sj
        ids[ai] = next_id
        next_id += 1
        del active[j]
    return merges


def cut_tree(merges, n, k):
    """Flat labels (1..k, numbered by first appearance) after undoing the last ``k - 1`` merges."""
    parent = list(range(n + len(merges)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step, (a, b, _, _) in enumerate(merges[: n - k]):
        new = n + step
        parent[find(a)] = new
        parent[find(b)] = new
    roots = [find(i) for i in range(n)]
    mapping = {}
    return np.array([mapping.setdefault(r, len(mapping) + 1) for r in roots])


def consensus_clusters(C, q):
    """Average-linkage clustering of ``1 - C`` cut at ``q`` clusters.

    Points that share a cluster in every run (distance 0) are never split,
    so fewer than ``q`` clusters come back when the ensemble has fewer
    distinct groups.
    """
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    if q > n or q < 1:
        raise ValueError(f"cannot cut {n} points into {q} clusters")
    merges = average_linkage(1.0 - C)
    zero = sum(1 for m in merges if m[2] <= 0.0)
    return cut_tree(merges, n, max(1, min(q, n - zero)))


def metrics_rows(metrics, run_id):
    return [(name, value, run_id) for name, value in metrics.items()]


def write_metrics_csv(rows, fh=None):
    out = fh or io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["metric", "value", "run"])
    for name, value, run in rows:
        w.writerow([name, repr(float(value)), run])
    return out.getvalue() if fh is None else None


def read_metrics_csv(fh):
    r = csv.DictReader(fh)
    return [(row["metric"], float(row["value"]), row["run"]) for row in r]


def write_matrix_csv(matrix, fh=None):
    out = fh or io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    for row in np.asarray(matrix):
        w.writerow([repr(float(v)) for v in row])
    return out.getvalue() if fh is None else None


def read_matrix_csv(fh):
    return np.array([[float(v) for v in row] for row in csv.reader(fh) if row])
