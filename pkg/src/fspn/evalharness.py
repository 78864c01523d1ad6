"""Brute-force oracles and metrics.

Everything here works on explicit joint tables over small discrete lattices
and talks to models only through point densities
(:func:`fspn.inference.point_log_density`), so it shares no code with range
inference and can serve as its oracle.
"""
from __future__ import annotations

import gc
import statistics
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data_io import DataMatrix
from .events import Event, Interval
from .inference import infer_evidence, infer_marginal, point_log_density
from .learning.config import LearnConfig
from .learning.rdc import avg_pairwise, correlation_matrix
from .model import FspnModel
from .random_models import random_event, random_fspn_of_size, random_variables

JOINT_LIMIT = 10**6


@dataclass
class JointTable:
    dims: tuple[int, ...]
    masses: np.ndarray

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if int(np.prod(self.dims, dtype=object)) > JOINT_LIMIT:
            raise ValueError(f"joint lattice exceeds {JOINT_LIMIT} states")
        self.masses = np.asarray(self.masses, dtype=np.float64).reshape(self.dims)

    @property
    def size(self) -> int:
        return self.masses.size

    def states(self) -> np.ndarray:
        """All lattice points, row-major, as an ``(size, m)`` float array."""
        grids = np.indices(self.dims).reshape(len(self.dims), -1).T
        return grids.astype(np.float64)


def _discrete_dims(variables) -> tuple[int, ...]:
    if any(not v.is_discrete for v in variables):
        raise ValueError("joint tables need all-discrete variables")
    dims = tuple(v.cardinality for v in variables)
    if int(np.prod(dims, dtype=object)) > JOINT_LIMIT:
        raise ValueError(f"joint lattice of {int(np.prod(dims, dtype=object))} states exceeds {JOINT_LIMIT}")
    return dims


def empirical_joint(data: DataMatrix) -> JointTable:
    dims = _discrete_dims(data.variables)
    if data.n_rows == 0:
        raise ValueError("empty data")
    flat = np.ravel_multi_index(tuple(data.values.astype(np.int64).T), dims)
    counts = np.bincount(flat, minlength=int(np.prod(dims))).astype(np.float64)
    return JointTable(dims, counts / counts.sum())


def brute_force_marginal(joint: JointTable, event: Event) -> float:
    if event.empty:
        return 0.0
    idx = []
    for iv, d in zip(event.intervals, joint.dims):
        lo, hi = max(int(iv.lo), 0), min(int(iv.hi), d - 1)
        if lo > hi:
            return 0.0
        idx.append(slice(lo, hi + 1))
    return float(joint.masses[tuple(idx)].sum())


def materialize_joint(model: FspnModel) -> JointTable:
    """Model probability of every lattice state, from point queries."""
    dims = _discrete_dims(model.variables)
    table = JointTable(dims, np.zeros(dims))
    with np.errstate(divide="ignore"):
        table.masses = np.exp(point_log_density(model, table.states())).reshape(dims)
    return table


def kl_tables(p: np.ndarray, q: np.ndarray) -> float:
    """``sum p ln(p/q)`` with ``0 ln 0 = 0`` and ``+inf`` where ``q = 0 < p``."""
    p = np.ravel(p)
    q = np.ravel(q)
    live = p > 0
    if np.any(q[live] <= 0):
        return float("inf")
    return float(max(np.sum(p[live] * (np.log(p[live]) - np.log(q[live]))), 0.0))


def kl_divergence(p: JointTable, model: FspnModel) -> float:
    """``KL(p || model)``; the model is queried only on the support of ``p``."""
    dims = _discrete_dims(model.variables)
    if dims != p.dims:
        raise ValueError(f"table dims {p.dims} do not match model variables {dims}")
    flat = np.ravel(p.masses)
    live = np.flatnonzero(flat > 0)
    states = np.stack(np.unravel_index(live, dims), axis=1).astype(np.float64)
    with np.errstate(divide="ignore"):
        logq = point_log_density(model, states)
    if np.any(np.isneginf(logq)):
        return float("inf")
    pl = flat[live]
    return float(max(np.sum(pl * (np.log(pl) - logq)), 0.0))


def evidence_kl(p: JointTable, model: FspnModel, query_vars: Sequence[int], evidence: Sequence[Event]) -> float:
    """Mean over evidence events ``e`` of ``KL(p(Q | e) || model(Q | e))``.

    ``Q`` ranges over the full lattice of ``query_vars``; both conditionals
    are obtained from range queries on a point box per ``Q`` state, the
    reference through :func:`brute_force_marginal`.
    """
    qv = list(query_vars)
    qdims = [p.dims[v] for v in qv]
    out = []
    for e in evidence:
        pe = brute_force_marginal(p, e)
        if pe <= 0:
            continue
        ps, qs = [], []
        for state in np.ndindex(*qdims):
            ivs = list(e.intervals)
            for v, s in zip(qv, state):
                ivs[v] = ivs[v].intersect(Interval(s, s))
            ev = Event(ivs)
            ps.append(brute_force_marginal(p, ev) / pe)
            qs.append(infer_evidence(model, ev, e))
        out.append(kl_tables(np.array(ps), np.array(qs)))
    return float(np.mean(out)) if out else float("nan")


def avg_rdc_score(data: DataMatrix, cfg: LearnConfig | None = None) -> float:
    """Mean pairwise RDC over all columns (the dependence axis of the trend experiment)."""
    cfg = cfg or LearnConfig()
    corr = correlation_matrix(data.values, list(range(data.n_cols)), cfg)
    return min(max(avg_pairwise(corr), 0.0), 1.0)


# -- scaling -------------------------------------------------------------------

@dataclass
class ScalingResult:
    n_nodes: list[int]
    median_seconds: list[float]
    slope: float | None
    r2: float | None

    def rows(self) -> list[tuple[int, float]]:
        return list(zip(self.n_nodes, self.median_seconds))


def loglog_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float | None, float | None]:
    if len(x) < 2:
        return None, None
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2) / ss) if ss > 0 else 1.0
    return float(slope), r2


def scaling_benchmark(sizes: Sequence[int], events_per_size: int = 100, seed: int = 0, n_vars: int = 20,
                      warmup: int = 5, models_per_size: int = 3) -> ScalingResult:
    """Median ``infer_marginal`` latency for random models of increasing size.

    Each size gets ``models_per_size`` random models over the same ``n_vars``
    discrete variables; every model answers ``events_per_size`` random events
    after ``warmup`` untimed calls, and the median is taken over all timings
    for that size. The reported node count is the mean over the models.
    """
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    rng = np.random.default_rng(seed)
    variables = random_variables(rng, n_vars)
    counts, medians = [], []
    for size in sizes:
        times, n_nodes = [], []
        for _ in range(models_per_size):
            model = random_fspn_of_size(variables, rng, size)
            n_nodes.append(sum(1 for _ in model.nodes()))
            events = [random_event(variables, rng) for _ in range(events_per_size)]
            for e in events[:warmup]:
                infer_marginal(model, e)
            gc_was = gc.isenabled()
            gc.disable()
            try:
                for e in events:
                    t0 = time.perf_counter()
                    infer_marginal(model, e)
                    times.append(time.perf_counter() - t0)
            finally:
                if gc_was:
                    gc.enable()
        counts.append(int(round(np.mean(n_nodes))))
        medians.append(statistics.median(times))
    slope, r2 = loglog_fit(counts, medians)
    return ScalingResult(counts, medians, slope, r2)
