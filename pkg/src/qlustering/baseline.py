"""Lloyd k-means with k-means++ seeding, the classical reference clustering."""

from dataclasses import dataclass

import numpy as np

from .validation import embed


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    restarts: int = 50
    max_iters: int = 300
    seed: int = 0
    init: str = "plus-plus"

    def __post_init__(self):
        if self.k < 1 or self.restarts < 1:
            raise ValueError("need k >= 1 and restarts >= 1")
        if self.init not in ("plus-plus", "random"):
            raise ValueError(f"unknown init {self.init!r}")


def _sq_dist(x, c):
    return np.maximum(((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2), 0.0)


def plus_plus_init(x, k, rng):
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    closest = ((x - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.uniform(0, total)))
            idx = min(idx, n - 1)
        centers.append(x[idx])
        closest = np.minimum(closest, ((x - x[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def lloyd(x, centers, max_iters=300, rtol=1e-9):
    """Lloyd iterations from given centers; returns ``(labels, centers, inertia, history)``."""
    centers = centers.copy()
    k = centers.shape[0]
    labels = None
    history = []
    for _ in range(max_iters):
        d2 = _sq_dist(x, centers)
        new = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(x.shape[0]), new].sum())
        history.append(inertia)
        if labels is not None and np.array_equal(new, labels):
            break
        if len(history) > 1 and history[-2] - inertia <= rtol * max(history[-2], 1e-300):
            labels = new
            break
        labels = new
        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = x[members].mean(axis=0)
            else:
                # reseed an empty cluster at the point farthest from its center
                far = int(np.argmax(d2[np.arange(x.shape[0]), labels]))
                centers[j] = x[far]
                labels[far] = j
                d2[far] = 0.0
    d2 = _sq_dist(x, centers)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(x.shape[0]), labels].sum())
    return labels, centers, inertia, history


def kmeans(points, cfg):
    """Best-of-restarts k-means; returns ``(labels, centers, inertia)`` with 1-based labels."""
    x = embed(points)
    n = x.shape[0]
    if n < cfg.k:
        raise ValueError(f"cannot form {cfg.k} clusters from {n} points")
    rng = np.random.default_rng(cfg.seed)
    best = None
    for _ in range(cfg.restarts):
        if cfg.init == "plus-plus":
            c0 = plus_plus_init(x, cfg.k, rng)
        else:
            c0 = x[rng.choice(n, cfg.k, replace=False)]
        labels, centers, inertia, _ = lloyd(x, c0, cfg.max_iters)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia)
    labels, centers, inertia = best
    return labels + 1, centers, inertia
