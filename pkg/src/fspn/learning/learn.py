"""Recursive top-down structure learning.

``learn_node(X, C)`` follows the usual four-way case analysis:

* no condition, some strongly correlated group ``H`` -> factorize into
  ``Pr(X \\ H)`` and ``Pr(H | X \\ H)``;
* no condition, one variable -> uni-leaf;
* no condition, independent column groups -> product;
* no condition otherwise -> sum over k-means row clusters;
* with a condition ``C``: ``X`` independent of ``C`` -> multi-leaf, otherwise
  a binary split on one variable of ``C``.

Every node draws its randomness from ``SeedSequence(seed, spawn_key=path)``
where ``path`` is the child-index path from the root, so the result does not
depend on the order in which subtrees are built.
"""
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from ..data_io import DataMatrix
from ..events import Interval, VariableMeta
from ..leaves import DiscreteHistogram, GaussianMixture, LeafDistribution
from ..model import Factorize, FspnModel, MultiLeaf, Node, Product, Split, Sum, UniLeaf, validate, ModelError
from .cluster import cluster_rows, standardize
from .config import LearnConfig
from .rdc import correlation_matrix, cross_rdc
from .split import group_correlated, partition_independent, split_conditional

log = logging.getLogger(__name__)

UNI_VAR_FLOOR = 1e-6
MULTI_REG = 1e-6


def _seed(cfg: LearnConfig, path: tuple[int, ...]) -> int:
    return int(np.random.SeedSequence(cfg.seed, spawn_key=path).generate_state(1)[0])


def fit_uni_leaf(values: np.ndarray, var: VariableMeta, cfg: LearnConfig, seed: int | None = None) -> LeafDistribution:
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if len(values) == 0:
        raise ValueError("cannot fit a leaf to zero rows")
    if var.is_discrete:
        return DiscreteHistogram.fit(values[:, None], [var.cardinality], cfg.smoothing_alpha)
    width = var.hi - var.lo
    return GaussianMixture.fit(values[:, None], [var.lo], [var.hi], [False], cfg.gmm_components,
                               cfg.seed if seed is None else seed, UNI_VAR_FLOOR * width * width)


def fit_multi_leaf(values: np.ndarray, scope: Sequence[int], variables: Sequence[VariableMeta], cfg: LearnConfig,
                   seed: int | None = None) -> LeafDistribution:
    """Joint leaf over the columns ``scope`` of ``values`` (rows already selected)."""
    scope = list(scope)
    sub = np.asarray(values, dtype=np.float64)[:, scope]
    if len(sub) == 0:
        raise ValueError("cannot fit a leaf to zero rows")
    metas = [variables[v] for v in scope]
    if all(m.is_discrete for m in metas):
        return DiscreteHistogram.fit(sub, [m.cardinality for m in metas], cfg.smoothing_alpha)
    lo = [m.lo if not m.is_discrete else -0.5 for m in metas]
    hi = [m.hi if not m.is_discrete else m.cardinality - 0.5 for m in metas]
    return GaussianMixture.fit(sub, lo, hi, [m.is_discrete for m in metas], cfg.gmm_components,
                               cfg.seed if seed is None else seed, MULTI_REG)


class _Learner:
    def __init__(self, values: np.ndarray, variables: Sequence[VariableMeta], cfg: LearnConfig):
        self.values = values
        self.variables = list(variables)
        self.cfg = cfg
        self.full = tuple(v.full_interval() for v in variables)

    def uni(self, rows, v, path) -> UniLeaf:
        return UniLeaf(v, fit_uni_leaf(self.values[rows, v], self.variables[v], self.cfg, _seed(self.cfg, path)))

    def naive(self, rows, xs, path) -> Node:
        if len(xs) == 1:
            return self.uni(rows, xs[0], path)
        return Product([self.uni(rows, v, path + (i,)) for i, v in enumerate(xs)])

    def multi(self, rows, xs, region, path) -> MultiLeaf:
        dist = fit_multi_leaf(self.values[rows], xs, self.variables, self.cfg, _seed(self.cfg, path))
        return MultiLeaf(tuple(xs), tuple(region), dist)

    def joint(self, rows, xs, depth, path) -> Node:
        """Model ``Pr(xs)`` on ``rows``."""
        cfg = self.cfg
        if len(xs) == 1:
            return self.uni(rows, xs[0], path)
        if len(rows) < cfg.min_instances or depth >= cfg.max_depth:
            return self.naive(rows, xs, path)
        corr = correlation_matrix(self.values[rows], xs, cfg)
        h = group_correlated(corr, cfg.tau_high)
        if h:
            if len(h) == len(xs):
                total = corr.scores.sum(axis=1)
                w = [xs[int(np.argmin(total))]]
                h = [v for v in xs if v not in w]
            else:
                h = sorted(h)
                w = [v for v in xs if v not in h]
            left = self.joint(rows, w, depth + 1, path + (0,))
            right = self.conditional(rows, h, w, self.full, depth + 1, path + (1,))
            return Factorize(left, right, frozenset(h), frozenset(w))
        parts = partition_independent(corr, cfg.tau_low)
        if len(parts) > 1:
            return Product([self.joint(rows, p, depth + 1, path + (i,)) for i, p in enumerate(parts)])
        rng = np.random.default_rng(_seed(cfg, path))
        groups, weights = cluster_rows(standardize(self.values[np.ix_(rows, xs)]), cfg.sum_k, rng)
        if len(groups) < 2:
            return self.naive(rows, xs, path)
        return Sum([self.joint(rows[g], xs, depth + 1, path + (i,)) for i, g in enumerate(groups)], weights)

    def conditional(self, rows, xs, cs, region, depth, path) -> Node:
        """Model ``Pr(xs | cs)`` on ``rows``, which all lie inside ``region``."""
        cfg = self.cfg
        if len(rows) < 2 * cfg.min_instances or depth >= cfg.max_depth:
            return self.multi(rows, xs, region, path)
        dep = cross_rdc(self.values[rows], xs, cs, cfg)
        if dep.max() < cfg.tau_low:
            return self.multi(rows, xs, region, path)
        rng = np.random.default_rng(_seed(cfg, path))
        cut = split_conditional(self.values, rows, xs, cs, self.variables, region, cfg, rng)
        if cut is None:
            return self.multi(rows, xs, region, path)
        left = self.conditional(cut.left_rows, xs, cs, cut.left_region, depth + 1, path + (0,))
        right = self.conditional(cut.right_rows, xs, cs, cut.right_region, depth + 1, path + (1,))
        return Split([left, right], [cut.left_region, cut.right_region])


def learn_fspn(data: DataMatrix, cfg: LearnConfig | None = None) -> FspnModel:
    """Learn a model of the joint distribution of every column of ``data``."""
    cfg = cfg or LearnConfig()
    if data.n_rows == 0:
        raise ValueError("cannot learn from empty data")
    if data.n_cols == 0:
        raise ValueError("data has no columns")
    learner = _Learner(data.values, data.variables, cfg)
    root = learner.joint(np.arange(data.n_rows), list(range(data.n_cols)), 0, ())
    model = FspnModel(list(data.variables), root, learn_config=cfg.to_dict())
    problems = validate(model)
    if problems:
        raise ModelError("learned model is invalid: " + "; ".join(problems))
    return model
