"""Leaf distributions with range-mass and point-density evaluation.

Every distribution is defined over ``ndim`` variables and answers two kinds of
question:

* ``mass(intervals)`` -- probability of an axis-aligned box, one
  :class:`~fspn.events.Interval` per dimension (already normalized to the
  variable domains, see :func:`fspn.events.normalize_interval`);
* ``log_point(values)`` -- vectorized log mass (discrete) or log density
  (continuous) of an ``(n, ndim)`` array of points.

Continuous distributions are truncated to their domain box so a full-domain
query returns exactly one.
"""
from __future__ import annotations

import math
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.special import logsumexp, ndtr

from .events import Interval

DENSE_LATTICE_LIMIT = 10**6


class LeafDistribution:
    kind: str = ""
    ndim: int

    def mass(self, intervals: Sequence[Interval]) -> float:
        raise NotImplementedError

    def log_point(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def n_params(self) -> int:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def check(self) -> list[str]:
        """Return a list of problems (empty when the distribution is well formed)."""
        return []


def _lattice_size(dims: Sequence[int]) -> int:
    return int(np.prod([int(d) for d in dims], dtype=object))


class DiscreteHistogram(LeafDistribution):
    """Dense probability table over the integer lattice ``prod(range(d))``."""

    kind = "histogram"

    def __init__(self, dims: Sequence[int], masses):
        self.dims = tuple(int(d) for d in dims)
        self.masses = np.asarray(masses, dtype=np.float64).reshape(self.dims)
        self.ndim = len(self.dims)
        if self.ndim == 1:
            self._cum = np.concatenate([[0.0], np.cumsum(self.masses)])

    @classmethod
    def fit(cls, values: np.ndarray, dims: Sequence[int], alpha: float) -> "LeafDistribution":
        """Smoothed frequencies ``(count + alpha) / (n + alpha * L)``.

        Lattices above :data:`DENSE_LATTICE_LIMIT` cells fall back to
        :class:`SparseHistogram`.
        """
        values = np.asarray(values, dtype=np.int64).reshape(len(values), -1)
        dims = tuple(int(d) for d in dims)
        size = _lattice_size(dims)
        if size > DENSE_LATTICE_LIMIT:
            return SparseHistogram.fit(values, dims, alpha)
        flat = np.ravel_multi_index(tuple(values.T), dims) if len(values) else np.zeros(0, np.int64)
        counts = np.bincount(flat, minlength=size).astype(np.float64)
        total = counts.sum() + alpha * size
        if total <= 0:
            return cls(dims, np.full(size, 1.0 / size))
        return cls(dims, (counts + alpha) / total)

    def mass(self, intervals: Sequence[Interval]) -> float:
        if self.ndim == 1:
            iv = intervals[0]
            if iv.empty:
                return 0.0
            return float(self._cum[int(iv.hi) + 1] - self._cum[int(iv.lo)])
        index = []
        for iv in intervals:
            if iv.empty:
                return 0.0
            index.append(slice(int(iv.lo), int(iv.hi) + 1))
        return float(self.masses[tuple(index)].sum())

    def log_point(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values).reshape(len(values), self.ndim)
        idx = np.rint(values).astype(np.int64)
        ok = np.all((idx >= 0) & (idx < np.array(self.dims)), axis=1) & np.all(idx == values, axis=1)
        out = np.full(len(values), -np.inf)
        if ok.any():
            with np.errstate(divide="ignore"):
                out[ok] = np.log(self.masses[tuple(idx[ok].T)])
        return out

    @property
    def n_params(self) -> int:
        return self.masses.size - 1

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dims": list(self.dims), "masses": self.masses.ravel().tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DiscreteHistogram":
        return cls(d["dims"], d["masses"])

    def check(self) -> list[str]:
        problems = []
        if not np.all(np.isfinite(self.masses)):
            problems.append("histogram has non-finite masses")
        elif np.any(self.masses < 0):
            problems.append("histogram has negative masses")
        elif abs(self.masses.sum() - 1.0) > 1e-9:
            problems.append(f"histogram masses sum {self.masses.sum():.12g} ≠ 1")
        return problems


class SparseHistogram(LeafDistribution):
    """Joint table for lattices too large to store densely.

    Observed tuples keep their own smoothed mass; the remaining ``escape``
    mass is spread uniformly over every unobserved lattice cell.
    """

    kind = "sparse_histogram"

    def __init__(self, dims: Sequence[int], support, masses, escape: float):
        self.dims = tuple(int(d) for d in dims)
        self.ndim = len(self.dims)
        self.support = np.asarray(support, dtype=np.int64).reshape(-1, self.ndim)
        self.masses = np.asarray(masses, dtype=np.float64)
        self.escape = float(escape)
        self.size = _lattice_size(self.dims)
        self._lookup = {tuple(row): i for i, row in enumerate(self.support.tolist())}

    @classmethod
    def fit(cls, values: np.ndarray, dims: Sequence[int], alpha: float) -> "SparseHistogram":
        values = np.asarray(values, dtype=np.int64)
        support, counts = np.unique(values, axis=0, return_counts=True)
        size = _lattice_size(dims)
        n_unseen = size - len(support)
        escape_count = alpha if n_unseen > 0 else 0.0
        total = counts.sum() + alpha * len(support) + escape_count
        return cls(dims, support, (counts + alpha) / total, escape_count / total)

    @cached_property
    def _per_unseen(self) -> float:
        n_unseen = self.size - len(self.support)
        return self.escape / n_unseen if n_unseen > 0 else 0.0

    def mass(self, intervals: Sequence[Interval]) -> float:
        if any(iv.empty for iv in intervals):
            return 0.0
        lo = np.array([iv.lo for iv in intervals])
        hi = np.array([iv.hi for iv in intervals])
        inside = np.all((self.support >= lo) & (self.support <= hi), axis=1)
        cells = 1
        for a, b in zip(lo, hi):
            cells *= int(b - a + 1)
        return float(self.masses[inside].sum() + self._per_unseen * (cells - int(inside.sum())))

    def log_point(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values).reshape(len(values), self.ndim)
        out = np.empty(len(values))
        log_unseen = math.log(self._per_unseen) if self._per_unseen > 0 else -math.inf
        for r, row in enumerate(values):
            key = tuple(int(x) for x in row)
            if key != tuple(row) or any(not 0 <= k < d for k, d in zip(key, self.dims)):
                out[r] = -math.inf
            elif key in self._lookup:
                out[r] = math.log(self.masses[self._lookup[key]])
            else:
                out[r] = log_unseen
        return out

    @property
    def n_params(self) -> int:
        return self.support.size + len(self.masses)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dims": list(self.dims),
            "support": self.support.tolist(),
            "masses": self.masses.tolist(),
            "escape": self.escape,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SparseHistogram":
        return cls(d["dims"], d["support"], d["masses"], d["escape"])

    def check(self) -> list[str]:
        total = self.masses.sum() + self.escape
        if not np.isfinite(total) or np.any(self.masses < 0) or self.escape < 0:
            return ["sparse histogram has invalid masses"]
        if abs(total - 1.0) > 1e-9:
            return [f"sparse histogram masses sum {total:.12g} ≠ 1"]
        return []


class BinnedHistogram(LeafDistribution):
    """Piecewise-uniform density on a grid of bins over continuous variables.

    ``edges[j]`` are the increasing bin edges of dimension ``j``; ``masses``
    has one entry per grid cell and sums to one.
    """

    kind = "binned"

    def __init__(self, edges: Sequence[Sequence[float]], masses):
        self.edges = [np.asarray(e, dtype=np.float64) for e in edges]
        self.ndim = len(self.edges)
        shape = tuple(len(e) - 1 for e in self.edges)
        self.masses = np.asarray(masses, dtype=np.float64).reshape(shape)

    def _overlap(self, j: int, iv: Interval) -> np.ndarray:
        e = self.edges[j]
        left = np.clip(iv.lo, e[:-1], e[1:])
        right = np.clip(iv.hi, e[:-1], e[1:])
        return (right - left) / (e[1:] - e[:-1])

    def mass(self, intervals: Sequence[Interval]) -> float:
        if any(iv.empty for iv in intervals):
            return 0.0
        out = self.masses
        for j in reversed(range(self.ndim)):
            out = out @ self._overlap(j, intervals[j])
        return float(out)

    def log_point(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64).reshape(len(values), self.ndim)
        logdens = np.log(self.masses)
        ok = np.ones(len(values), dtype=bool)
        index = []
        for j, e in enumerate(self.edges):
            x = values[:, j]
            ok &= (x >= e[0]) & (x <= e[-1])
            b = np.clip(np.searchsorted(e, x, side="right") - 1, 0, len(e) - 2)
            logdens = logdens - np.log(np.diff(e)).reshape([-1 if k == j else 1 for k in range(self.ndim)])
            index.append(b)
        out = np.full(len(values), -np.inf)
        with np.errstate(divide="ignore"):
            out[ok] = logdens[tuple(b[ok] for b in index)]
        return out

    @property
    def n_params(self) -> int:
        return self.masses.size - 1 + sum(len(e) for e in self.edges)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "edges": [e.tolist() for e in self.edges], "masses": self.masses.ravel().tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BinnedHistogram":
        return cls(d["edges"], d["masses"])

    def check(self) -> list[str]:
        if any(np.any(np.diff(e) <= 0) for e in self.edges):
            return ["binned histogram edges not strictly increasing"]
        if not np.all(np.isfinite(self.masses)) or np.any(self.masses < 0):
            return ["binned histogram has invalid masses"]
        if abs(self.masses.sum() - 1.0) > 1e-9:
            return [f"binned histogram masses sum {self.masses.sum():.12g} ≠ 1"]
        return []


# -- Gaussian box integrals -------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_QUAD_BUDGET = 200_000
_TAIL_SD = 8.0


def _composite_nodes(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(a, b, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return x, w


def gaussian_box_mass(mean: np.ndarray, cov: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float:
    """Mass of ``N(mean, cov)`` on the box ``[lo, hi]``.

    The last coordinate is integrated exactly through its conditional normal
    CDF; the others use a tensor grid of composite 8-point Gauss-Legendre
    panels over the box clipped to ``mean +/- 8 sd``.
    """
    d = len(mean)
    sd = np.sqrt(np.diag(cov))
    a = np.maximum(lo, mean - _TAIL_SD * sd)
    b = np.minimum(hi, mean + _TAIL_SD * sd)
    if np.any(a >= b):
        return 0.0
    if d == 1:
        return float(ndtr((b[0] - mean[0]) / sd[0]) - ndtr((a[0] - mean[0]) / sd[0]))
    r = d - 1
    panels = max(1, int(_QUAD_BUDGET ** (1.0 / r)) // len(_GL_NODES))
    panels = min(panels, 16)
    axes = [_composite_nodes(a[j], b[j], panels) for j in range(r)]
    grid = np.stack(np.meshgrid(*[x for x, _ in axes], indexing="ij"), axis=-1).reshape(-1, r)
    wgrid = np.ones(1)
    for _, w in axes:
        wgrid = np.multiply.outer(wgrid, w)
    wgrid = wgrid.reshape(-1)

    s_rr = cov[:r, :r]
    s_lr = cov[r, :r]
    chol = np.linalg.cholesky(s_rr)
    diff = grid - mean[:r]
    z = np.linalg.solve(chol, diff.T)  # (r, N)
    logpdf = -0.5 * np.sum(z * z, axis=0) - np.log(np.diag(chol)).sum() - 0.5 * r * math.log(2 * math.pi)
    beta = np.linalg.solve(s_rr, s_lr)
    cmean = mean[r] + diff @ beta
    cvar = max(cov[r, r] - s_lr @ beta, 1e-300)
    csd = math.sqrt(cvar)
    inner = ndtr((hi[r] - cmean) / csd) - ndtr((lo[r] - cmean) / csd)
    return float(np.sum(wgrid * np.exp(logpdf) * inner))


class GaussianMixture(LeafDistribution):
    """Full-covariance Gaussian mixture truncated to a box domain.

    Discrete dimensions (``discrete[j]``) are treated as unit-width cells
    centred on the integer codes, so a discrete interval ``[a, b]`` maps to
    the real interval ``[a - 1/2, b + 1/2]``.
    """

    kind = "gmm"

    def __init__(self, lo, hi, discrete, weights, means, covs):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        self.ndim = len(self.lo)
        self.discrete = tuple(bool(x) for x in discrete)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.means = np.asarray(means, dtype=np.float64).reshape(len(self.weights), self.ndim)
        self.covs = np.asarray(covs, dtype=np.float64).reshape(len(self.weights), self.ndim, self.ndim)

    @classmethod
    def fit(cls, values: np.ndarray, lo, hi, discrete, n_components: int, seed: int,
            reg_covar: float) -> "GaussianMixture":
        from sklearn.mixture import GaussianMixture as SkGMM

        values = np.asarray(values, dtype=np.float64).reshape(len(values), -1)
        n_distinct = len(np.unique(values, axis=0))
        k = max(1, min(n_components, n_distinct))
        if k == 1:
            mean = values.mean(axis=0)
            diff = values - mean
            cov = diff.T @ diff / len(values) + reg_covar * np.eye(values.shape[1])
            return cls(lo, hi, discrete, [1.0], [mean], [cov])
        sk = SkGMM(n_components=k, covariance_type="full", reg_covar=reg_covar,
                   random_state=seed, max_iter=200, n_init=1)
        sk.fit(values)
        order = np.lexsort(sk.means_.T[::-1])
        return cls(lo, hi, discrete, sk.weights_[order], sk.means_[order], sk.covariances_[order])

    def _box(self, intervals: Sequence[Interval]) -> tuple[np.ndarray, np.ndarray]:
        lo = np.empty(self.ndim)
        hi = np.empty(self.ndim)
        for j, iv in enumerate(intervals):
            pad = 0.5 if self.discrete[j] else 0.0
            lo[j] = max(iv.lo - pad, self.lo[j])
            hi[j] = min(iv.hi + pad, self.hi[j])
        return lo, hi

    def _raw_mass(self, lo: np.ndarray, hi: np.ndarray) -> float:
        if np.any(lo >= hi):
            return 0.0
        return sum(w * gaussian_box_mass(m, c, lo, hi) for w, m, c in zip(self.weights, self.means, self.covs))

    @cached_property
    def normalizer(self) -> float:
        return self._raw_mass(self.lo, self.hi)

    def mass(self, intervals: Sequence[Interval]) -> float:
        if any(iv.empty for iv in intervals):
            return 0.0
        lo, hi = self._box(intervals)
        return min(1.0, self._raw_mass(lo, hi) / self.normalizer)

    def log_point(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64).reshape(len(values), self.ndim)
        cont = [j for j in range(self.ndim) if not self.discrete[j]]
        disc = [j for j in range(self.ndim) if self.discrete[j]]
        inside = np.all((values >= self.lo) & (values <= self.hi), axis=1)
        comp = np.empty((len(values), len(self.weights)))
        for c, (w, m, cov) in enumerate(zip(self.weights, self.means, self.covs)):
            lp = np.full(len(values), math.log(w))
            if cont:
                lp += _mvn_logpdf(values[:, cont], m[cont], cov[np.ix_(cont, cont)])
            if disc:
                lp += self._log_discrete_cells(values, m, cov, cont, disc)
            comp[:, c] = lp
        out = logsumexp(comp, axis=1) - math.log(self.normalizer)
        out[~inside] = -np.inf
        return out

    def _log_discrete_cells(self, values, m, cov, cont, disc) -> np.ndarray:
        s_dd = cov[np.ix_(disc, disc)]
        if cont:
            s_dc = cov[np.ix_(disc, cont)]
            gain = np.linalg.solve(cov[np.ix_(cont, cont)], s_dc.T).T
            cmeans = m[disc] + (values[:, cont] - m[cont]) @ gain.T
            ccov = s_dd - gain @ s_dc.T
        else:
            cmeans = np.broadcast_to(m[disc], (len(values), len(disc)))
            ccov = s_dd
        out = np.empty(len(values))
        for r in range(len(values)):
            x = values[r, disc]
            lo = np.maximum(x - 0.5, self.lo[disc])
            hi = np.minimum(x + 0.5, self.hi[disc])
            p = gaussian_box_mass(cmeans[r], ccov, lo, hi) if np.all(lo < hi) else 0.0
            out[r] = math.log(p) if p > 0 else -math.inf
        return out

    @property
    def n_params(self) -> int:
        k, d = len(self.weights), self.ndim
        return k * (d + d * (d + 1) // 2) + k - 1

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lo": self.lo.tolist(),
            "hi": self.hi.tolist(),
            "discrete": list(self.discrete),
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covs": self.covs.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianMixture":
        return cls(d["lo"], d["hi"], d["discrete"], d["weights"], d["means"], d["covs"])

    def check(self) -> list[str]:
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.means))
                and np.all(np.isfinite(self.covs))):
            return ["gmm has non-finite parameters"]
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1.0) > 1e-9:
            return ["gmm weights must be positive and sum to 1"]
        for cov in self.covs:
            if np.any(np.linalg.eigvalsh(cov) <= 0):
                return ["gmm covariance not positive definite"]
        if not self.normalizer > 0:
            return ["gmm has no mass on its domain"]
        return []


def _mvn_logpdf(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    chol = np.linalg.cholesky(cov)
    z = np.linalg.solve(chol, (x - mean).T)
    k = len(mean)
    return -0.5 * np.sum(z * z, axis=0) - np.log(np.diag(chol)).sum() - 0.5 * k * math.log(2 * math.pi)


_KINDS = {
    DiscreteHistogram.kind: DiscreteHistogram,
    SparseHistogram.kind: SparseHistogram,
    BinnedHistogram.kind: BinnedHistogram,
    GaussianMixture.kind: GaussianMixture,
}


def dist_from_dict(d: dict) -> LeafDistribution:
    try:
        cls = _KINDS[d["kind"]]
    except KeyError:
        raise ValueError(f"unknown leaf distribution kind {d.get('kind')!r}") from None
    return cls.from_dict(d)
