"""Variable grouping, independent-subset detection and conditional splitting."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from ..events import Interval, VariableMeta
from .cluster import kmeans
from .config import LearnConfig
from .rdc import CorrelationMatrix, cross_rdc


def _components(adj: np.ndarray) -> list[list[int]]:
    _, labels = connected_components(adj, directed=False)
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def group_correlated(corr: CorrelationMatrix, tau_high: float) -> set[int]:
    """Variables joined to at least one other by a chain of scores >= ``tau_high``."""
    adj = corr.scores >= tau_high
    np.fill_diagonal(adj, False)
    out: set[int] = set()
    for comp in _components(adj):
        if len(comp) > 1:
            out |= {corr.scope[i] for i in comp}
    return out


def partition_independent(corr: CorrelationMatrix, tau_low: float) -> list[list[int]]:
    """Connected components under edges with score > ``tau_low``; one component means no product split."""
    adj = corr.scores > tau_low
    np.fill_diagonal(adj, False)
    return [[corr.scope[i] for i in comp] for comp in _components(adj)]


@dataclass
class SplitDecision:
    variable: int
    threshold: float
    left_rows: np.ndarray
    right_rows: np.ndarray
    left_region: tuple[Interval, ...]
    right_region: tuple[Interval, ...]


def cut_region(region: Sequence[Interval], var: VariableMeta, v: int, threshold: float):
    """Left gets ``x <= threshold``, right gets ``x > threshold``."""
    iv = region[v]
    if var.is_discrete:
        t = int(np.floor(threshold))
        left, right = Interval(iv.lo, t), Interval(t + 1, iv.hi)
    else:
        left = Interval(iv.lo, threshold, iv.lo_open, False)
        right = Interval(threshold, iv.hi, True, iv.hi_open)
    region = tuple(region)
    return region[:v] + (left,) + region[v + 1:], region[:v] + (right,) + region[v + 1:]


def _decision(values, rows, variables, region, v, threshold) -> SplitDecision | None:
    if variables[v].is_discrete:
        threshold = float(np.floor(threshold))
    mask = values[rows, v] <= threshold
    if mask.all() or not mask.any():
        return None
    left_region, right_region = cut_region(region, variables[v], v, threshold)
    return SplitDecision(v, threshold, rows[mask], rows[~mask], left_region, right_region)


def _greedy(values, rows, xs, cs, variables, region, cfg, rng) -> SplitDecision | None:
    sub = values[rows]
    live = [c for c in cs if np.ptp(sub[:, c]) > 0]
    if not live:
        return None
    strength = cross_rdc(sub, xs, live, cfg).mean(axis=0)
    v = live[int(np.argmax(strength))]  # argmax takes the first maximum, live is index ordered
    cuts = np.unique(sub[:, v])[:-1]
    if len(cuts) > cfg.greedy_candidates:
        cuts = np.sort(rng.choice(cuts, size=cfg.greedy_candidates, replace=False))
    best, best_score = None, np.inf
    n = len(rows)
    for t in cuts:
        mask = sub[:, v] <= t
        score = 0.0
        for part in (sub[mask], sub[~mask]):
            if len(part) >= 2:
                score += len(part) / n * cross_rdc(part, xs, cs, cfg).mean()
        if score < best_score - 1e-12:
            best, best_score = t, score
    return _decision(values, rows, variables, region, v, best)


def _grid_kmeans(values, rows, xs, cs, variables, region, cfg, rng) -> SplitDecision | None:
    sub = values[np.ix_(rows, cs)]
    sd = sub.std(axis=0)
    if np.all(sd == 0):
        return None
    sd[sd == 0] = 1.0
    mu = sub.mean(axis=0)
    z = (sub - mu) / sd
    labels, centers = kmeans(z, 2, rng)
    if len(centers) < 2:
        return None
    c1, c2 = centers
    gap = np.linalg.norm(c2 - c1)
    if gap == 0:
        return None
    u = (c2 - c1) / gap
    r1 = np.linalg.norm(z[labels == 0] - c1, axis=1).mean()
    r2 = np.linalg.norm(z[labels == 1] - c2, axis=1).mean()
    mid = ((c1 + r1 * u) + (c2 - r2 * u)) / 2
    best, best_bad = None, None
    for j, v in enumerate(cs):
        if c1[j] == c2[j]:
            continue
        t = mid[j] * sd[j] + mu[j]
        if variables[v].is_discrete:
            t = float(np.floor(t))
        low_side = sub[:, j] <= t
        if low_side.all() or not low_side.any():
            continue
        expect = labels == (0 if c1[j] < c2[j] else 1)
        bad = int(np.sum(low_side != expect))
        if best_bad is None or bad < best_bad:
            best, best_bad = (v, t), bad
    if best is None:
        return None
    return _decision(values, rows, variables, region, best[0], best[1])


def split_conditional(values: np.ndarray, rows: np.ndarray, xs: Sequence[int], cs: Sequence[int],
                      variables: Sequence[VariableMeta], region: Sequence[Interval], cfg: LearnConfig,
                      rng: np.random.Generator) -> SplitDecision | None:
    """Binary axis-aligned split of ``rows`` on one conditioning variable.

    Returns ``None`` when no split leaves both halves non-empty (for
    instance when every conditioning column is constant).
    """
    rows = np.asarray(rows)
    if cfg.split_method == "greedy":
        return _greedy(values, rows, list(xs), list(cs), variables, region, cfg, rng)
    return _grid_kmeans(values, rows, list(xs), list(cs), variables, region, cfg, rng)
