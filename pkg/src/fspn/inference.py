"""Probability inference on FSPN models.

Two independent evaluation paths live here:

* :func:`infer_marginal` -- range probability of an axis-aligned event by
  recursive evaluation, with the event split into per-region parts at each
  factorize node;
* :func:`point_log_density` -- vectorized log mass/density of complete rows,
  which routes every row to the single multi-leaf whose region contains it.
  It is what :func:`log_likelihood` and the brute-force oracles use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .events import Event, Interval
from .model import Factorize, FspnModel, MultiLeaf, Node, Product, Split, Sum, UniLeaf

EVIDENCE_EPS = 1e-12


class InferenceError(ValueError):
    pass


@dataclass
class EventPartition:
    parts: list[tuple[Event, int]]


def partition_event_by_multileaves(event: Event, leaves: Sequence[MultiLeaf],
                                   cond_vars: Sequence[int] | None = None) -> EventPartition:
    """Intersect ``event`` with each leaf's condition region, dropping empty parts.

    ``cond_vars`` restricts the intersection to the conditioning variables;
    by default every variable is intersected.
    """
    parts = []
    if event.empty:
        return EventPartition(parts)
    ivs = event.intervals
    dims = range(len(ivs)) if cond_vars is None else cond_vars
    for i, leaf in enumerate(leaves):
        region = leaf.condition_region
        updates = {}
        empty = False
        for v in dims:
            iv = ivs[v].intersect(region[v])
            if iv.empty:
                empty = True
                break
            if iv != ivs[v]:
                updates[v] = iv
        if not empty:
            parts.append((event.replace(updates) if updates else event, i))
    return EventPartition(parts)


def _leaf_mass(dist, ivs: Sequence[Interval]) -> float:
    p = dist.mass(ivs)
    if math.isnan(p):
        raise InferenceError("NaN from leaf distribution (corrupt model?)")
    return p


def _infer(node: Node, event: Event) -> float:
    ivs = event.intervals
    if isinstance(node, UniLeaf):
        return _leaf_mass(node.dist, (ivs[node.variable],))
    if isinstance(node, Sum):
        total = 0.0
        for w, c in zip(node.weights, node.nodes):
            total += w * _infer(c, event)
        return total
    if isinstance(node, Product):
        p = 1.0
        for c in node.nodes:
            p *= _infer(c, event)
            if p == 0.0:
                break
        return p
    if isinstance(node, Factorize):
        total = 0.0
        leaves = node.multileaves
        for part, i in partition_event_by_multileaves(event, leaves, node.cond_vars).parts:
            leaf = leaves[i]
            p = _leaf_mass(leaf.dist, [part.intervals[v] for v in leaf.scope_vars])
            if p == 0.0:
                continue
            total += p * _infer(node.left, part)
        return total
    raise InferenceError(f"cannot evaluate {type(node).__name__} outside a factorize node")


def _check_event(model: FspnModel, event: Event) -> None:
    if len(event) != model.n_vars:
        raise InferenceError(f"event has {len(event)} intervals, model has {model.n_vars} variables")


def infer_marginal(model: FspnModel, event: Event) -> float:
    """Probability that a sample falls in ``event`` (clamped to [0, 1])."""
    _check_event(model, event)
    if event.empty:
        return 0.0
    p = _infer(model.root, event)
    return min(max(p, 0.0), 1.0)


def conjoin(a: Event, b: Event) -> Event:
    return Event([x.intersect(y) for x, y in zip(a.intervals, b.intervals)])


def infer_evidence(model: FspnModel, query: Event, evidence: Event) -> float:
    """``Pr(query | evidence)`` as a ratio of two marginals."""
    _check_event(model, query)
    _check_event(model, evidence)
    denom = infer_marginal(model, evidence)
    if denom < EVIDENCE_EPS:
        raise InferenceError("evidence has zero mass")
    num = infer_marginal(model, conjoin(query, evidence))
    return min(max(num / denom, 0.0), 1.0)


# -- point path -------------------------------------------------------------

def _route(node: Node, rows: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    """Write the multi-leaf log density for ``rows[idx]`` into ``out[idx]``."""
    if len(idx) == 0:
        return
    if isinstance(node, MultiLeaf):
        out[idx] = node.dist.log_point(rows[np.ix_(idx, node.scope_vars)])
        return
    remaining = idx
    for child, region in zip(node.nodes, node.regions):
        inside = np.ones(len(remaining), dtype=bool)
        for v, iv in enumerate(region):
            x = rows[remaining, v]
            lo_ok = x > iv.lo if iv.lo_open else x >= iv.lo
            hi_ok = x < iv.hi if iv.hi_open else x <= iv.hi
            inside &= lo_ok & hi_ok
        _route(child, rows, remaining[inside], out)
        remaining = remaining[~inside]
    # rows outside every region (only possible off-domain) keep -inf


def _log_point(node: Node, rows: np.ndarray) -> np.ndarray:
    if isinstance(node, UniLeaf):
        return node.dist.log_point(rows[:, [node.variable]])
    if isinstance(node, Sum):
        parts = np.stack([_log_point(c, rows) for c in node.nodes], axis=1)
        with np.errstate(divide="ignore"):
            return logsumexp(parts, axis=1, b=np.asarray(node.weights)[None, :])
    if isinstance(node, Product):
        out = np.zeros(len(rows))
        for c in node.nodes:
            out += _log_point(c, rows)
        return out
    if isinstance(node, Factorize):
        right = np.full(len(rows), -np.inf)
        _route(node.right, rows, np.arange(len(rows)), right)
        return _log_point(node.left, rows) + right
    raise InferenceError(f"cannot evaluate {type(node).__name__} outside a factorize node")


def point_log_density(model: FspnModel, rows: np.ndarray, batch: int = 65536) -> np.ndarray:
    """Log mass/density of each complete row under the model."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != model.n_vars:
        raise InferenceError(f"rows must have shape (n, {model.n_vars})")
    out = np.empty(len(rows))
    for s in range(0, len(rows), batch):
        with np.errstate(invalid="ignore"):
            out[s:s + batch] = _log_point(model.root, rows[s:s + batch])
    if np.any(np.isnan(out)):
        raise InferenceError("NaN from leaf distribution (corrupt model?)")
    return out


def log_likelihood(model: FspnModel, data) -> tuple[np.ndarray, float]:
    """Per-row natural-log likelihood and its average.

    ``data`` is a :class:`~fspn.data_io.DataMatrix` or a plain array whose
    columns follow the model variable order.
    """
    values = getattr(data, "values", data)
    variables = getattr(data, "variables", None)
    if variables is not None:
        if len(variables) != model.n_vars:
            raise InferenceError(f"data has {len(variables)} columns, model has {model.n_vars} variables")
        for dv, mv in zip(variables, model.variables):
            if dv.kind != mv.kind:
                raise InferenceError(f"column {dv.name!r} is {dv.kind}, model variable {mv.name!r} is {mv.kind}")
    per_row = point_log_density(model, values)
    return per_row, float(per_row.mean()) if len(per_row) else float("nan")
