"""Randomized dependence coefficient.

Each column is copula transformed (average ranks scaled to ``(0, 1]``),
projected through ``k`` random sine features and reduced to an orthonormal
basis of its centred feature span. The coefficient of two columns is the
largest canonical correlation between their feature spans, i.e. the top
singular value of ``Qa.T @ Qb``; the reported score is the median over
``rdc_seeds`` independent projections.

Both columns of a pair share the same projection draw, which makes the score
exactly symmetric and equal to one for a column against itself.

Bases are kept in "level space": a column with ``u`` distinct values has
features that are functions of its level, so ``Q = G[codes]`` with ``G`` of
shape ``(u, r)``. Columns with more than ``MAX_LEVELS`` distinct values are
first rank-binned into ``MAX_LEVELS`` equal-count bins of the copula value.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .config import LearnConfig

RANK_TOL = 1e-10
MAX_LEVELS = 1024


@lru_cache(maxsize=64)
def _projections(seed: int, n_seeds: int, k: int, scale: float) -> np.ndarray:
    rng = np.random.default_rng([seed, 0x5DC])
    # two inputs per feature (copula value and constant), so scale / 2
    return rng.standard_normal((n_seeds, 2, k)) * (scale / 2.0)


@dataclass
class ColumnBasis:
    codes: np.ndarray  # level of each row, 0 .. u-1
    levels: list[np.ndarray]  # per seed, (u, r) basis in level space

    @property
    def n_levels(self) -> int:
        return len(self.levels[0]) if self.levels else 0


def _copula_levels(col: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Level codes, per-level copula value (average rank / n) and per-level counts."""
    n = len(col)
    uniq, codes, counts = np.unique(col, return_inverse=True, return_counts=True)
    below = np.concatenate([[0], np.cumsum(counts)[:-1]])
    u = (below + (counts + 1) / 2.0) / n
    if len(uniq) > MAX_LEVELS:
        u_rows = u[codes]
        order = np.argsort(u_rows, kind="stable")
        bins = np.empty(n, dtype=np.int64)
        bins[order] = np.arange(n) * MAX_LEVELS // n
        counts = np.bincount(bins, minlength=MAX_LEVELS)
        u = np.bincount(bins, weights=u_rows, minlength=MAX_LEVELS) / np.maximum(counts, 1)
        keep = counts > 0
        remap = np.cumsum(keep) - 1
        return remap[bins], u[keep], counts[keep]
    return codes.reshape(-1), u, counts


def feature_bases(col: np.ndarray, cfg: LearnConfig) -> ColumnBasis:
    """Orthonormal bases (one per projection seed) of a column's centred sine features."""
    col = np.asarray(col, dtype=np.float64)
    n = len(col)
    if n < 2 or np.all(col == col[0]):
        return ColumnBasis(np.zeros(n, dtype=np.int64), [np.zeros((1, 0))] * cfg.rdc_seeds)
    codes, u, counts = _copula_levels(col)
    x = np.stack([u, np.ones(len(u))], axis=1)
    sw = np.sqrt(counts.astype(np.float64))
    levels = []
    for w in _projections(cfg.seed, cfg.rdc_seeds, cfg.rdc_features, cfg.rdc_scale):
        f = np.sin(x @ w)
        f -= (counts @ f) / n
        # SVD of the count-weighted level features equals the SVD of the n-row feature matrix
        uu, s, _ = np.linalg.svd(sw[:, None] * f, full_matrices=False)
        keep = s > RANK_TOL * s[0] if s[0] > 0 else np.zeros(len(s), bool)
        levels.append(uu[:, keep] / sw[:, None])
    return ColumnBasis(codes, levels)


def _cross(a: ColumnBasis, b: ColumnBasis) -> list[np.ndarray]:
    """Per seed, the matrix ``Qa.T @ Qb``."""
    ua, ub = a.n_levels, b.n_levels
    n = len(a.codes)
    if ua * ub <= max(n, 4096):
        table = np.bincount(a.codes * ub + b.codes, minlength=ua * ub).reshape(ua, ub).astype(np.float64)
        return [ga.T @ table @ gb for ga, gb in zip(a.levels, b.levels)]
    out = []
    for ga, gb in zip(a.levels, b.levels):
        qb = gb[b.codes]
        sums = np.stack([np.bincount(a.codes, weights=qb[:, j], minlength=ua) for j in range(qb.shape[1])], axis=1) \
            if qb.shape[1] else np.zeros((ua, 0))
        out.append(ga.T @ sums)
    return out


def _order_key(basis: ColumnBasis):
    return basis.n_levels, basis.codes.tobytes()


def rdc_from_bases(a: ColumnBasis, b: ColumnBasis) -> float:
    # Qa.T @ Qb and Qb.T @ Qa have the same spectrum but round differently
    if _order_key(b) < _order_key(a):
        a, b = b, a
    scores = []
    for m in _cross(a, b):
        scores.append(float(np.linalg.norm(m, ord=2)) if m.size else 0.0)
    return float(min(1.0, max(0.0, np.median(scores))))


def _sample_rows(n: int, cfg: LearnConfig) -> np.ndarray | slice:
    if cfg.rdc_max_rows and n > cfg.rdc_max_rows:
        rng = np.random.default_rng([cfg.seed, n, 0x5A])
        return np.sort(rng.choice(n, size=cfg.rdc_max_rows, replace=False))
    return slice(None)


def rdc(col_a, col_b, cfg: LearnConfig | None = None) -> float:
    """Dependence score in ``[0, 1]``; constant columns score 0."""
    cfg = cfg or LearnConfig()
    a = np.asarray(col_a, dtype=np.float64)
    b = np.asarray(col_b, dtype=np.float64)
    if len(a) != len(b):
        raise ValueError("columns must have equal length")
    if len(a) < 2:
        raise ValueError("need at least two observations")
    rows = _sample_rows(len(a), cfg)
    return rdc_from_bases(feature_bases(a[rows], cfg), feature_bases(b[rows], cfg))


class CorrelationMatrix:
    """Symmetric pairwise RDC scores over ``scope`` (in the given order)."""

    def __init__(self, scope: Sequence[int], scores: np.ndarray):
        self.scope = list(scope)
        self.scores = np.asarray(scores, dtype=np.float64)

    def __getitem__(self, key):
        return self.scores[key]

    def __repr__(self) -> str:
        return f"CorrelationMatrix(scope={self.scope}, scores={self.scores.round(3).tolist()})"


def correlation_matrix(values: np.ndarray, scope: Sequence[int], cfg: LearnConfig) -> CorrelationMatrix:
    """All pairwise scores among the columns ``scope`` of ``values``."""
    scope = list(scope)
    if len(scope) < 2:
        raise ValueError("correlation matrix needs at least two variables")
    if len(values) < 2:
        return CorrelationMatrix(scope, np.eye(len(scope)))
    rows = _sample_rows(len(values), cfg)
    bases = [feature_bases(values[rows, v], cfg) for v in scope]
    m = len(scope)
    scores = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            scores[i, j] = scores[j, i] = rdc_from_bases(bases[i], bases[j])
    return CorrelationMatrix(scope, scores)


def cross_rdc(values: np.ndarray, xs: Sequence[int], cs: Sequence[int], cfg: LearnConfig) -> np.ndarray:
    """``|xs| x |cs|`` matrix of scores between two variable groups."""
    out = np.zeros((len(xs), len(cs)))
    if len(values) < 2:
        return out
    rows = _sample_rows(len(values), cfg)
    bx = [feature_bases(values[rows, v], cfg) for v in xs]
    bc = [feature_bases(values[rows, v], cfg) for v in cs]
    for i in range(len(xs)):
        for j in range(len(cs)):
            out[i, j] = rdc_from_bases(bx[i], bc[j])
    return out


def avg_pairwise(corr: CorrelationMatrix) -> float:
    m = len(corr.scope)
    iu = np.triu_indices(m, 1)
    return float(corr.scores[iu].mean())
