"""k-means with k-means++ seeding, used for sum-node row clustering."""
from __future__ import annotations

import numpy as np

MAX_ITER = 100
REL_TOL = 1e-6
N_INIT = 3


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [x[rng.integers(len(x))]]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            break
        c = x[rng.choice(len(x), p=d2 / total)]
        centers.append(c)
        d2 = np.minimum(d2, np.sum((x - c) ** 2, axis=1))
    return np.array(centers)


def _assign(x: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, float]:
    d2 = (np.sum(x * x, axis=1)[:, None] - 2 * x @ centers.T + np.sum(centers * centers, axis=1)[None, :])
    labels = np.argmin(d2, axis=1)
    return labels, float(np.maximum(d2[np.arange(len(x)), labels], 0).sum())


def kmeans(x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = MAX_ITER,
           tol: float = REL_TOL, n_init: int = N_INIT) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd iterations from k-means++ seeds, best of ``n_init`` restarts.

    Each run stops after ``max_iter`` rounds or once the relative inertia
    change drops below ``tol``. Empty clusters are dropped, so fewer than
    ``k`` centers may come back; labels index the returned centers.
    """
    x = np.asarray(x, dtype=np.float64)
    best = None
    for _ in range(n_init):
        labels, centers, inertia = _lloyd(x, k, rng, max_iter, tol)
        if best is None or inertia < best[2]:
            best = labels, centers, inertia
    return best[0], best[1]


def _lloyd(x, k, rng, max_iter, tol):
    centers = _kmeanspp(x, k, rng)
    labels, inertia = _assign(x, centers)
    for _ in range(max_iter):
        used = np.unique(labels)
        centers = np.array([x[labels == c].mean(axis=0) for c in used])
        labels, new = _assign(x, centers)
        done = inertia == 0 or abs(inertia - new) <= tol * inertia
        inertia = new
        if done:
            break
    used, labels = np.unique(labels, return_inverse=True)
    return labels.reshape(-1), centers[used], inertia


def standardize(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    return (x - x.mean(axis=0)) / sd


def cluster_rows(values: np.ndarray, k: int, seed) -> tuple[list[np.ndarray], list[float]]:
    """Partition row indices into at most ``k`` non-empty clusters.

    Returns the index arrays and the weights ``|D_i| / |D|``.
    """
    values = np.asarray(values, dtype=np.float64)
    if len(values) < k:
        raise ValueError(f"need at least k={k} rows, got {len(values)}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    labels, _ = kmeans(values, k, rng)
    groups = [np.flatnonzero(labels == c) for c in range(labels.max() + 1)]
    groups = [g for g in groups if len(g)]
    n = len(values)
    return groups, [len(g) / n for g in groups]
