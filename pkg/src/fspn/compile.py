"""Discrete Bayesian networks and their compilation into FSPNs.

Text format (``#`` starts a comment, blank lines ignored)::

    variables
    A 2
    B 3
    edges
    A -> B
    cpt A
    : 0.4 0.6
    cpt B
    0 : 0.2 0.3 0.5
    1 : 0.1 0.1 0.8

A CPT row lists the parent values (parents in variable-declaration order)
before the colon and the distribution over the node's values after it. Every
parent-value combination needs exactly one row.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .events import Interval, VariableMeta
from .leaves import DiscreteHistogram
from .model import Factorize, FspnModel, MultiLeaf, Node, Product, Split, UniLeaf

ROW_TOL = 1e-9


class BayesNetError(ValueError):
    pass


@dataclass
class BayesNet:
    """``parents[i]`` is sorted by index; ``cpts[i]`` has shape ``(*parent cards, card_i)``."""

    variables: list[VariableMeta]
    parents: list[list[int]]
    cpts: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.parents = [sorted(int(p) for p in ps) for ps in self.parents]
        self.cpts = [np.asarray(c, dtype=np.float64) for c in self.cpts]
        problems = self.check()
        if problems:
            raise BayesNetError("; ".join(problems))

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def check(self) -> list[str]:
        out = []
        m = self.n_vars
        if len(self.parents) != m or len(self.cpts) != m:
            return ["need one parent list and one CPT per variable"]
        for i, var in enumerate(self.variables):
            if not var.is_discrete:
                out.append(f"{var.name}: only discrete variables are supported")
                continue
            if any(not 0 <= p < m or p == i for p in self.parents[i]):
                out.append(f"{var.name}: bad parent index")
                continue
            shape = tuple(self.variables[p].cardinality for p in self.parents[i]) + (var.cardinality,)
            cpt = self.cpts[i]
            if cpt.shape != shape:
                out.append(f"{var.name}: CPT shape {cpt.shape}, expected {shape}")
                continue
            if np.any(cpt < 0) or np.any(np.abs(cpt.sum(axis=-1) - 1.0) > ROW_TOL):
                out.append(f"{var.name}: CPT rows must be non-negative and sum to 1")
        if not out and self.topological_order() is None:
            out.append("graph has a cycle")
        return out

    def topological_order(self) -> list[int] | None:
        indeg = [len(ps) for ps in self.parents]
        children = [[] for _ in range(self.n_vars)]
        for i, ps in enumerate(self.parents):
            for p in ps:
                children[p].append(i)
        ready = sorted(i for i, d in enumerate(indeg) if d == 0)
        order = []
        while ready:
            i = ready.pop(0)
            order.append(i)
            for c in children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort()
        return order if len(order) == self.n_vars else None

    def cpt_entries(self) -> int:
        return int(sum(c.size for c in self.cpts))


# -- text format -------------------------------------------------------------

def parse_bn(text: str) -> BayesNet:
    names: list[str] = []
    cards: list[int] = []
    edges: list[tuple[str, str]] = []
    rows: dict[str, list[tuple[tuple[int, ...], list[float]]]] = {}
    section, current = None, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()
        try:
            if head[0] in ("variables", "edges") and len(head) == 1:
                section = head[0]
            elif head[0] == "cpt":
                section, current = "cpt", head[1]
                if current not in names:
                    raise BayesNetError(f"unknown variable {current!r}")
                rows.setdefault(current, [])
            elif section == "variables":
                names.append(head[0])
                cards.append(int(head[1]))
            elif section == "edges":
                a, arrow, b = line.split()
                if arrow != "->":
                    raise BayesNetError("edges are written 'A -> B'")
                edges.append((a, b))
            elif section == "cpt":
                left, right = line.split(":")
                rows[current].append((tuple(int(x) for x in left.split()), [float(x) for x in right.split()]))
            else:
                raise BayesNetError("content outside any section")
        except (ValueError, IndexError) as e:
            raise BayesNetError(f"line {lineno}: {e}") from None
    index = {n: i for i, n in enumerate(names)}
    if len(index) != len(names):
        raise BayesNetError("duplicate variable name")
    parents = [[] for _ in names]
    for a, b in edges:
        if a not in index or b not in index:
            raise BayesNetError(f"edge {a} -> {b} mentions an unknown variable")
        parents[index[b]].append(index[a])
    parents = [sorted(set(ps)) for ps in parents]
    cpts = []
    for i, name in enumerate(names):
        shape = tuple(cards[p] for p in parents[i]) + (cards[i],)
        table = np.full(shape, np.nan)
        for key, probs in rows.get(name, []):
            if len(key) != len(parents[i]) or len(probs) != cards[i]:
                raise BayesNetError(f"cpt {name}: row {key} has the wrong arity")
            table[key] = probs
        if np.isnan(table).any():
            raise BayesNetError(f"cpt {name}: missing rows (incomplete CPT)")
        cpts.append(table)
    variables = [VariableMeta.discrete(n, c) for n, c in zip(names, cards)]
    return BayesNet(variables, parents, cpts)


def format_bn(bn: BayesNet) -> str:
    lines = ["variables"]
    lines += [f"{v.name} {v.cardinality}" for v in bn.variables]
    lines.append("edges")
    for i, ps in enumerate(bn.parents):
        lines += [f"{bn.variables[p].name} -> {bn.variables[i].name}" for p in ps]
    for i, var in enumerate(bn.variables):
        lines.append(f"cpt {var.name}")
        cpt = bn.cpts[i]
        for key in itertools.product(*(range(n) for n in cpt.shape[:-1])):
            probs = " ".join(repr(float(x)) for x in cpt[key])
            lines.append(f"{' '.join(map(str, key))} : {probs}".lstrip())
    return "\n".join(lines) + "\n"


def load_bn(path) -> BayesNet:
    with open(path, encoding="utf-8") as f:
        return parse_bn(f.read())


# -- compilation -------------------------------------------------------------

def _components(nodes: Sequence[int], parents: list[list[int]]) -> list[list[int]]:
    alive = set(nodes)
    adj = {v: set() for v in nodes}
    for v in nodes:
        for p in parents[v]:
            if p in alive:
                adj[v].add(p)
                adj[p].add(v)
    out, seen = [], set()
    for v in sorted(nodes):
        if v in seen:
            continue
        stack, comp = [v], []
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u] - seen:
                seen.add(w)
                stack.append(w)
        out.append(sorted(comp))
    return out


class _Compiler:
    def __init__(self, bn: BayesNet):
        self.bn = bn
        self.full = tuple(v.full_interval() for v in bn.variables)

    def build(self, nodes: list[int]) -> Node:
        comps = _components(nodes, self.bn.parents)
        if len(comps) > 1:
            return Product([self.build(c) for c in comps])
        alive = set(nodes)
        has_child = {p for v in nodes for p in self.bn.parents[v] if p in alive}
        sink = min(v for v in nodes if v not in has_child)
        if len(nodes) == 1:
            # removed nodes were sinks, so a node left on its own never had parents
            cpt = self.bn.cpts[sink]
            return UniLeaf(sink, DiscreteHistogram(cpt.shape, cpt))
        rest = [v for v in nodes if v != sink]
        right = self.splits(sink, 0, self.full)
        return Factorize(self.build(rest), right, frozenset([sink]), frozenset(rest))

    def splits(self, sink: int, k: int, region: tuple[Interval, ...]) -> Node:
        """Nested binary splits over parent ``k`` onward; one multi-leaf per parent assignment."""
        ps = self.bn.parents[sink]
        while k < len(ps) and region[ps[k]].lo == region[ps[k]].hi:
            k += 1
        if k == len(ps):
            key = tuple(int(region[p].lo) for p in ps)
            probs = self.bn.cpts[sink][key]
            return MultiLeaf((sink,), region, DiscreteHistogram([len(probs)], probs))
        p = ps[k]
        iv = region[p]
        a = int(iv.lo)
        left = region[:p] + (Interval(a, a),) + region[p + 1:]
        right = region[:p] + (Interval(a + 1, iv.hi),) + region[p + 1:]
        return Split([self.splits(sink, k, left), self.splits(sink, k, right)], [left, right])


def bn_to_fspn(bn: BayesNet) -> FspnModel:
    """Compile ``bn`` into an equivalent FSPN.

    Disconnected parts become product children; otherwise the lowest-index
    sink is factorized out and its CPT becomes one multi-leaf per parent
    assignment, reached through nested binary splits on the parents.
    """
    problems = bn.check()
    if problems:
        raise BayesNetError("; ".join(problems))
    root = _Compiler(bn).build(list(range(bn.n_vars)))
    return FspnModel(list(bn.variables), root)


def bn_joint(bn: BayesNet):
    """Chain-rule joint table of ``bn``."""
    from .evalharness import JOINT_LIMIT, JointTable

    dims = tuple(v.cardinality for v in bn.variables)
    size = int(np.prod(dims, dtype=object))
    if size > JOINT_LIMIT:
        raise BayesNetError(f"joint lattice of {size} states exceeds {JOINT_LIMIT}")
    m = bn.n_vars
    joint = np.ones(dims)
    for i in range(m):
        axes = bn.parents[i] + [i]
        shape = [1] * m
        for a in axes:
            shape[a] = dims[a]
        # cpt axes are (parents in index order, i); i may sit between parents in variable order
        order = np.argsort(axes)
        joint = joint * np.transpose(bn.cpts[i], order).reshape(shape)
    return JointTable(dims, joint)


def random_bn(rng: np.random.Generator, n_vars: int, max_parents: int = 3, edge_prob: float = 0.4,
              max_card: int = 2) -> BayesNet:
    """Random DAG over a random variable order, Dirichlet(1) CPT rows."""
    order = rng.permutation(n_vars)
    cards = [int(rng.integers(2, max_card + 1)) for _ in range(n_vars)]
    parents = [[] for _ in range(n_vars)]
    for pos, v in enumerate(order):
        cands = [int(u) for u in order[:pos] if rng.random() < edge_prob]
        parents[v] = sorted(cands[:max_parents])
    cpts = []
    for v in range(n_vars):
        shape = tuple(cards[p] for p in parents[v])
        rows = rng.dirichlet(np.ones(cards[v]), size=int(np.prod(shape, dtype=int)))
        cpts.append(rows.reshape(shape + (cards[v],)))
    variables = [VariableMeta.discrete(f"B{i}", c) for i, c in enumerate(cards)]
    return BayesNet(variables, parents, cpts)


def sample_bn(bn: BayesNet, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` ancestral samples as an ``(n, m)`` float array of codes."""
    out = np.zeros((n, bn.n_vars), dtype=np.int64)
    for v in bn.topological_order():
        ps = bn.parents[v]
        rows = bn.cpts[v][tuple(out[:, p] for p in ps)] if ps else np.broadcast_to(bn.cpts[v], (n, bn.cpts[v].size))
        cum = np.cumsum(rows, axis=1)
        u = rng.random(n)[:, None] * cum[:, -1:]
        out[:, v] = np.minimum((u >= cum).sum(axis=1), cum.shape[1] - 1)
    return out.astype(np.float64)
