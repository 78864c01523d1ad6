"""Random valid FSPN models and random events, for property tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .events import Event, Interval, VariableMeta
from .leaves import BinnedHistogram, DiscreteHistogram
from .model import Factorize, FspnModel, MultiLeaf, Node, Product, Split, Sum, UniLeaf


def random_variables(rng: np.random.Generator, n_vars: int, max_card: int = 5,
                     continuous_frac: float = 0.0) -> list[VariableMeta]:
    out = []
    for i in range(n_vars):
        if rng.random() < continuous_frac:
            lo = float(rng.integers(-5, 5))
            out.append(VariableMeta.continuous(f"V{i}", lo, lo + float(rng.integers(1, 10))))
        else:
            out.append(VariableMeta.discrete(f"V{i}", int(rng.integers(2, max_card + 1))))
    return out


def _random_dist(rng, variables, scope):
    if all(variables[v].is_discrete for v in scope):
        dims = [variables[v].cardinality for v in scope]
        return DiscreteHistogram(dims, rng.dirichlet(np.ones(int(np.prod(dims)))))
    edges = []
    for v in scope:
        var = variables[v]
        if var.is_discrete:
            raise ValueError("mixed random leaves are not generated")
        inner = np.sort(rng.uniform(var.lo, var.hi, size=int(rng.integers(1, 4))))
        edges.append(np.unique(np.concatenate([[var.lo], inner, [var.hi]])))
    shape = [len(e) - 1 for e in edges]
    return BinnedHistogram(edges, rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape))


def _homogeneous_kind(variables, scope) -> bool:
    kinds = {variables[v].is_discrete for v in scope}
    return len(kinds) == 1


class _Builder:
    def __init__(self, variables, rng, factorize_prob, max_factorize_depth, max_leaves):
        self.variables = variables
        self.rng = rng
        self.factorize_prob = factorize_prob
        self.max_factorize_depth = max_factorize_depth
        self.max_leaves = max_leaves
        self.full = tuple(v.full_interval() for v in variables)

    def leaf(self, v: int) -> UniLeaf:
        return UniLeaf(v, _random_dist(self.rng, self.variables, [v]))

    def naive(self, scope) -> Node:
        if len(scope) == 1:
            return self.leaf(scope[0])
        return Product([self.leaf(v) for v in scope])

    def build(self, scope: list[int], budget: int, fdepth: int) -> Node:
        rng = self.rng
        if len(scope) == 1:
            if budget >= 3 and rng.random() < 0.5:
                k = int(min(budget - 1, rng.integers(2, 5)))
                return Sum([self.leaf(scope[0]) for _ in range(k)], list(rng.dirichlet(np.ones(k))))
            return self.leaf(scope[0])
        if budget <= len(scope) + 1:
            return self.naive(scope)
        u = rng.random()
        if fdepth > 0 and u < self.factorize_prob:
            node = self.factorize(scope, budget, fdepth)
            if node is not None:
                return node
        if u < 0.6 and budget >= 2 * (len(scope) + 1) + 1:
            k = int(min(rng.integers(2, 5), (budget - 1) // (len(scope) + 1)))
            sub = (budget - 1) // k
            return Sum([self.build(scope, sub, fdepth) for _ in range(k)], list(rng.dirichlet(np.ones(k))))
        perm = list(rng.permutation(scope))
        k = int(min(len(scope), rng.integers(2, 4)))
        cuts = sorted(rng.choice(np.arange(1, len(scope)), size=k - 1, replace=False)) if k > 1 else []
        parts = [sorted(int(v) for v in p) for p in np.split(np.array(perm), cuts)]
        rest = budget - 1
        return Product([self.build(p, max(1, rest * len(p) // len(scope)), fdepth) for p in parts])

    def factorize(self, scope, budget, fdepth) -> Node | None:
        rng = self.rng
        perm = [int(v) for v in rng.permutation(scope)]
        h_size = int(rng.integers(1, min(2, len(scope) - 1) + 1))
        h = sorted(perm[:h_size])
        w = sorted(perm[h_size:])
        if not _homogeneous_kind(self.variables, h):
            return None
        n_leaves = int(rng.integers(1, self.max_leaves + 1))
        right = self.split_tree(h, w, self.full, n_leaves)
        right_nodes = 2 * n_leaves - 1
        left = self.build(w, max(1, budget - 1 - right_nodes), fdepth - 1)
        return Factorize(left, right, frozenset(h), frozenset(w))

    def split_tree(self, h, w, region, n_leaves) -> Node:
        rng = self.rng
        splittable = []
        for v in w:
            iv, var = region[v], self.variables[v]
            if (var.is_discrete and iv.hi > iv.lo) or (not var.is_discrete and iv.hi - iv.lo > 1e-6):
                splittable.append(v)
        if n_leaves <= 1 or not splittable:
            return MultiLeaf(tuple(h), region, _random_dist(rng, self.variables, h))
        v = int(rng.choice(splittable))
        iv, var = region[v], self.variables[v]
        if var.is_discrete:
            t = int(rng.integers(iv.lo, iv.hi))
            left_iv, right_iv = Interval(iv.lo, t), Interval(t + 1, iv.hi)
        else:
            t = float(rng.uniform(iv.lo + 0.1 * (iv.hi - iv.lo), iv.hi - 0.1 * (iv.hi - iv.lo)))
            left_iv = Interval(iv.lo, t, iv.lo_open, False)
            right_iv = Interval(t, iv.hi, True, iv.hi_open)
        r_left = region[:v] + (left_iv,) + region[v + 1:]
        r_right = region[:v] + (right_iv,) + region[v + 1:]
        n_left = int(rng.integers(1, n_leaves))
        return Split([self.split_tree(h, w, r_left, n_left), self.split_tree(h, w, r_right, n_leaves - n_left)],
                     [r_left, r_right])


def random_fspn(variables: list[VariableMeta], rng: np.random.Generator, target_nodes: int = 30,
                factorize_prob: float = 0.3, max_factorize_depth: int = 2, max_leaves: int = 3) -> FspnModel:
    """Random valid model of roughly ``target_nodes`` nodes.

    ``max_factorize_depth`` bounds how many factorize nodes can be nested along
    one root-to-leaf path, and ``max_leaves`` bounds the multi-leaves under each
    factorize node; together they bound the number of event parts evaluated
    per node.
    """
    b = _Builder(variables, rng, factorize_prob, max_factorize_depth, max_leaves)
    root = b.build(list(range(len(variables))), target_nodes, max_factorize_depth)
    return FspnModel(list(variables), root)


def random_event(variables: list[VariableMeta], rng: np.random.Generator, p_constrain: float = 0.5) -> Event:
    ivs = []
    for var in variables:
        if rng.random() >= p_constrain:
            ivs.append(var.full_interval())
        elif var.is_discrete:
            a, b = sorted(int(x) for x in rng.integers(0, var.cardinality, size=2))
            ivs.append(Interval(a, b))
        else:
            a, b = sorted(rng.uniform(var.lo, var.hi, size=2))
            ivs.append(Interval(float(a), float(b), bool(rng.random() < 0.3), bool(rng.random() < 0.3)))
    return Event.canonical(ivs, variables)


def random_fspn_of_size(variables: list[VariableMeta], rng: np.random.Generator, n_nodes: int,
                        rel_tol: float = 0.15, attempts: int = 8, **kw) -> FspnModel:
    """Random model whose node count is within ``rel_tol`` of ``n_nodes`` (best effort).

    The builder's budget is only a rough guide, so the target is rescaled by
    the observed ratio until the count lands close enough.
    """
    target = n_nodes
    best, best_gap = None, np.inf
    for _ in range(attempts):
        model = random_fspn(variables, rng, target_nodes=max(2, int(target)), **kw)
        count = sum(1 for _ in model.nodes())
        gap = abs(count - n_nodes) / n_nodes
        if gap < best_gap:
            best, best_gap = model, gap
        if gap <= rel_tol:
            break
        target *= n_nodes / count
    return best
