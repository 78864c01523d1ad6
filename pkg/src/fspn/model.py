"""FSPN tree data model, structural validation, statistics and file format.

A model is a tree of six node types. ``Factorize`` separates a set of highly
correlated variables ``H`` from the rest ``W``: its left child models
``Pr(W)`` and its right child models ``Pr(H | W)`` as a tree of ``Split``
nodes over ``W`` ending in ``MultiLeaf`` nodes. ``Sum``, ``Product`` and
``UniLeaf`` behave as in a sum-product network.

Nodes are treated as immutable once built.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .events import Interval, VariableMeta, box_volume, boxes_disjoint
from .leaves import LeafDistribution, dist_from_dict

FORMAT_VERSION = 1
WEIGHT_TOL = 1e-9


class Node:
    @property
    def scope(self) -> frozenset:
        raise NotImplementedError

    @property
    def children(self) -> Sequence["Node"]:
        return ()


@dataclass(eq=False)
class UniLeaf(Node):
    variable: int
    dist: LeafDistribution

    @property
    def scope(self) -> frozenset:
        return frozenset([self.variable])


@dataclass(eq=False)
class MultiLeaf(Node):
    """Distribution of ``scope`` valid inside ``condition_region``.

    ``condition_region`` has one interval per model variable; only the
    conditioning variables of the enclosing factorize node are constrained.
    """

    scope_vars: tuple[int, ...]
    condition_region: tuple[Interval, ...]
    dist: LeafDistribution

    @property
    def scope(self) -> frozenset:
        return frozenset(self.scope_vars)


@dataclass(eq=False)
class Sum(Node):
    nodes: list[Node]
    weights: list[float]

    @property
    def children(self):
        return self.nodes

    @cached_property
    def scope(self) -> frozenset:
        return self.nodes[0].scope if self.nodes else frozenset()


@dataclass(eq=False)
class Product(Node):
    nodes: list[Node]

    @property
    def children(self):
        return self.nodes

    @property
    def child_scopes(self) -> list[frozenset]:
        return [c.scope for c in self.nodes]

    @cached_property
    def scope(self) -> frozenset:
        return frozenset().union(*(c.scope for c in self.nodes))


@dataclass(eq=False)
class Split(Node):
    """Partition of the conditioning space into hyper-rectangular regions."""

    nodes: list[Node]
    regions: list[tuple[Interval, ...]]

    @property
    def children(self):
        return self.nodes

    @cached_property
    def scope(self) -> frozenset:
        return self.nodes[0].scope if self.nodes else frozenset()


@dataclass(eq=False)
class Factorize(Node):
    left: Node
    right: Node
    h_scope: frozenset = field(default=frozenset())
    w_scope: frozenset = field(default=frozenset())

    def __post_init__(self):
        self.h_scope = frozenset(self.h_scope) or self.right.scope
        self.w_scope = frozenset(self.w_scope) or self.left.scope

    @property
    def children(self):
        return (self.left, self.right)

    @cached_property
    def scope(self) -> frozenset:
        return self.h_scope | self.w_scope

    @cached_property
    def multileaves(self) -> list[MultiLeaf]:
        """Multi-leaf nodes of the right subtree in depth-first order."""
        out, stack = [], [self.right]
        while stack:
            node = stack.pop()
            if isinstance(node, MultiLeaf):
                out.append(node)
            else:
                stack.extend(reversed(node.children))
        return out

    @cached_property
    def cond_vars(self) -> tuple[int, ...]:
        return tuple(sorted(self.w_scope))


@dataclass(eq=False)
class FspnModel:
    variables: list[VariableMeta]
    root: Node
    format_version: int = FORMAT_VERSION
    learn_config: dict | None = None

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def full_region(self) -> tuple[Interval, ...]:
        return tuple(v.full_interval() for v in self.variables)

    def nodes(self) -> Iterator[Node]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


# -- validation -------------------------------------------------------------

def validate(model: FspnModel) -> list[str]:
    """List every structural invariant the model violates, each prefixed with a node path."""
    problems: list[str] = []
    variables = model.variables
    m = len(variables)
    full = model.full_region()

    def fail(path, msg):
        problems.append(f"{path}: {msg}")

    def check_dist(path, dist, var_ids):
        for p in dist.check():
            fail(path, p)
        if dist.ndim != len(var_ids):
            fail(path, f"distribution has {dist.ndim} dims for scope of {len(var_ids)}")
            return
        for j, v in enumerate(var_ids):
            var = variables[v]
            dims = getattr(dist, "dims", None)
            if dims is not None:
                if not var.is_discrete:
                    fail(path, f"histogram over continuous variable {var.name}")
                elif dims[j] != var.cardinality:
                    fail(path, f"histogram dim {dims[j]} ≠ cardinality {var.cardinality} of {var.name}")
            if getattr(dist, "edges", None) is not None and var.is_discrete:
                fail(path, f"binned histogram over discrete variable {var.name}")

    def check_var_ids(path, ids) -> bool:
        bad = [v for v in ids if not (isinstance(v, (int, np.integer)) and 0 <= v < m)]
        if bad:
            fail(path, f"unknown variable index {bad}")
        return not bad

    def visit(node, path, conditional, cond_vars, region):
        """``conditional`` is True inside the right subtree of a factorize node."""
        if isinstance(node, (Split, MultiLeaf)) and not conditional:
            fail(path, f"{type(node).__name__} outside the right subtree of a factorize node")
        if conditional and not isinstance(node, (Split, MultiLeaf)):
            fail(path, f"{type(node).__name__} inside a conditional subtree")
            return
        if isinstance(node, UniLeaf):
            if check_var_ids(path, [node.variable]):
                check_dist(path, node.dist, [node.variable])
        elif isinstance(node, MultiLeaf):
            if not node.scope_vars:
                fail(path, "multi-leaf with empty scope")
            if len(set(node.scope_vars)) != len(node.scope_vars):
                fail(path, "multi-leaf scope has duplicates")
            if check_var_ids(path, node.scope_vars):
                check_dist(path, node.dist, node.scope_vars)
            if region is not None and tuple(node.condition_region) != tuple(region):
                fail(path, "multi-leaf condition region differs from the region of its split path")
        elif isinstance(node, Sum):
            if not node.nodes:
                fail(path, "sum node without children")
                return
            if len(node.weights) != len(node.nodes):
                fail(path, "sum weights/children length mismatch")
            w = np.asarray(node.weights, dtype=float)
            if np.any(~np.isfinite(w)) or np.any(w <= 0):
                fail(path, "sum weights must be positive")
            if abs(w.sum() - 1.0) > WEIGHT_TOL:
                fail(path, f"weights sum {w.sum():.12g} ≠ 1")
            for i, c in enumerate(node.nodes):
                if c.scope != node.nodes[0].scope:
                    fail(f"{path}/sum[{i}]", "child scope differs from siblings")
                visit(c, f"{path}/sum[{i}]", False, None, None)
        elif isinstance(node, Product):
            if not node.nodes:
                fail(path, "product node without children")
                return
            seen: set = set()
            for i, c in enumerate(node.nodes):
                s = c.scope
                if seen & s:
                    fail(path, f"product child scopes overlap on {sorted(seen & s)}")
                seen |= s
                visit(c, f"{path}/product[{i}]", False, None, None)
        elif isinstance(node, Factorize):
            h, w = node.h_scope, node.w_scope
            if not h:
                fail(path, "factorize with empty H")
            if not w:
                fail(path, "factorize with empty W")
            if h & w:
                fail(path, "factorize H and W overlap")
            if node.left.scope != w:
                fail(path, "left child scope ≠ W")
            if node.right.scope != h:
                fail(path, "right child scope ≠ H")
            if not isinstance(node.right, (Split, MultiLeaf)):
                fail(path, "right child must be a split or multi-leaf node")
            visit(node.left, f"{path}/left", False, None, None)
            visit(node.right, f"{path}/right", True, tuple(sorted(w)), full)
        elif isinstance(node, Split):
            if not node.nodes or len(node.nodes) != len(node.regions):
                fail(path, "split needs one region per child")
                return
            for i, r in enumerate(node.regions):
                if len(r) != m:
                    fail(path, f"region {i} has {len(r)} intervals for {m} variables")
                    return
            parent = region
            for i, r in enumerate(node.regions):
                for v in range(m):
                    if v in cond_vars:
                        if r[v].empty or not r[v].within(parent[v]):
                            fail(path, f"region {i} not inside parent region on {variables[v].name}")
                    elif r[v] != parent[v]:
                        fail(path, f"region {i} constrains non-condition variable {variables[v].name}")
            for i in range(len(node.regions)):
                for j in range(i + 1, len(node.regions)):
                    if not boxes_disjoint(node.regions[i], node.regions[j]):
                        fail(path, f"regions not disjoint ({i}, {j})")
            total = sum(box_volume(r, variables, cond_vars) for r in node.regions)
            want = box_volume(parent, variables, cond_vars)
            if abs(total - want) > 1e-9 * max(1.0, abs(want)):
                fail(path, f"regions do not cover parent region (volume {total:.12g} vs {want:.12g})")
            for i, (c, r) in enumerate(zip(node.nodes, node.regions)):
                if c.scope != node.scope:
                    fail(f"{path}/split[{i}]", "child scope differs from siblings")
                visit(c, f"{path}/split[{i}]", True, cond_vars, tuple(r))
        else:
            fail(path, f"unknown node type {type(node).__name__}")

    visit(model.root, "root", False, None, None)
    if not problems and model.root.scope != frozenset(range(m)):
        fail("root", "root scope does not cover all variables")
    return problems


class ModelError(ValueError):
    pass


# -- statistics -------------------------------------------------------------

@dataclass
class ModelStats:
    n_nodes: int
    n_factorize: int
    n_multileaf: int
    n_params: int
    depth: int
    n_sum: int = 0
    n_product: int = 0
    n_split: int = 0
    n_unileaf: int = 0
    # most factorize nodes on one root-to-leaf path; range fan-out grows as l**nesting
    factorize_nesting: int = 0


def _split_cuts(node: Split, parent_region) -> int:
    """Count interior cut points: distinct child lower bounds above the parent's."""
    cuts = 0
    for v in range(len(parent_region)):
        lows = {r[v].lo for r in node.regions if r[v].lo != parent_region[v].lo or r[v].lo_open != parent_region[v].lo_open}
        cuts += len(lows)
    return cuts


def stats(model: FspnModel) -> ModelStats:
    counts = dict(n_nodes=0, n_factorize=0, n_multileaf=0, n_params=0, n_sum=0, n_product=0,
                  n_split=0, n_unileaf=0)
    depth = nesting = 0
    full = model.full_region()
    stack = [(model.root, 1, full, 0)]
    while stack:
        node, d, region, fz = stack.pop()
        depth = max(depth, d)
        nesting = max(nesting, fz)
        counts["n_nodes"] += 1
        if isinstance(node, UniLeaf):
            counts["n_unileaf"] += 1
            counts["n_params"] += node.dist.n_params
        elif isinstance(node, MultiLeaf):
            counts["n_multileaf"] += 1
            counts["n_params"] += node.dist.n_params
        elif isinstance(node, Sum):
            counts["n_sum"] += 1
            counts["n_params"] += len(node.weights) - 1
        elif isinstance(node, Product):
            counts["n_product"] += 1
        elif isinstance(node, Factorize):
            counts["n_factorize"] += 1
            fz += 1
            nesting = max(nesting, fz)
        elif isinstance(node, Split):
            counts["n_split"] += 1
            counts["n_params"] += _split_cuts(node, region)
            stack.extend((c, d + 1, tuple(r), fz) for c, r in zip(node.nodes, node.regions))
            continue
        stack.extend((c, d + 1, full, fz) for c in node.children)
    return ModelStats(depth=depth, factorize_nesting=nesting, **counts)


# -- serialization ----------------------------------------------------------

def _region_to_list(region) -> list:
    return [iv.to_list() for iv in region]


def _region_from_list(v) -> tuple[Interval, ...]:
    return tuple(Interval.from_list(iv) for iv in v)


def node_to_dict(node: Node) -> dict:
    if isinstance(node, UniLeaf):
        return {"type": "uni_leaf", "variable": node.variable, "dist": node.dist.to_dict()}
    if isinstance(node, MultiLeaf):
        return {"type": "multi_leaf", "scope": list(node.scope_vars),
                "condition_region": _region_to_list(node.condition_region), "dist": node.dist.to_dict()}
    if isinstance(node, Sum):
        return {"type": "sum", "weights": [float(w) for w in node.weights],
                "children": [node_to_dict(c) for c in node.nodes]}
    if isinstance(node, Product):
        return {"type": "product", "child_scopes": [sorted(s) for s in node.child_scopes],
                "children": [node_to_dict(c) for c in node.nodes]}
    if isinstance(node, Split):
        return {"type": "split", "regions": [_region_to_list(r) for r in node.regions],
                "children": [node_to_dict(c) for c in node.nodes]}
    if isinstance(node, Factorize):
        return {"type": "factorize", "h_scope": sorted(node.h_scope), "w_scope": sorted(node.w_scope),
                "left": node_to_dict(node.left), "right": node_to_dict(node.right)}
    raise TypeError(f"unknown node type {type(node).__name__}")


def node_from_dict(d: dict) -> Node:
    t = d.get("type")
    if t == "uni_leaf":
        return UniLeaf(int(d["variable"]), dist_from_dict(d["dist"]))
    if t == "multi_leaf":
        return MultiLeaf(tuple(int(v) for v in d["scope"]), _region_from_list(d["condition_region"]),
                         dist_from_dict(d["dist"]))
    if t == "sum":
        return Sum([node_from_dict(c) for c in d["children"]], [float(w) for w in d["weights"]])
    if t == "product":
        node = Product([node_from_dict(c) for c in d["children"]])
        declared = [frozenset(s) for s in d["child_scopes"]]
        if declared != node.child_scopes:
            raise ModelError("product child_scopes do not match children")
        return node
    if t == "split":
        return Split([node_from_dict(c) for c in d["children"]], [_region_from_list(r) for r in d["regions"]])
    if t == "factorize":
        return Factorize(node_from_dict(d["left"]), node_from_dict(d["right"]),
                         frozenset(d["h_scope"]), frozenset(d["w_scope"]))
    raise ModelError(f"unknown node tag {t!r}")


def serialize(model: FspnModel) -> str:
    doc = {
        "format_version": model.format_version,
        "variables": [v.to_dict() for v in model.variables],
        "learn_config": model.learn_config,
        "root": node_to_dict(model.root),
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def deserialize(text: str, check: bool = True) -> FspnModel:
    """Parse a model file; with ``check`` (default) invalid models are rejected."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"model file is not valid JSON: {e}") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelError(f"unsupported format version {version!r}")
    try:
        variables = [VariableMeta.from_dict(v) for v in doc["variables"]]
        root = node_from_dict(doc["root"])
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ModelError):
            raise
        raise ModelError(f"malformed model file: {e!r}") from None
    model = FspnModel(variables, root, version, doc.get("learn_config"))
    problems = validate(model) if check else []
    if problems:
        raise ModelError("invalid model:\n  " + "\n  ".join(problems))
    return model


def save(model: FspnModel, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize(model))


def load(path, check: bool = True) -> FspnModel:
    with open(path, encoding="utf-8") as f:
        return deserialize(f.read(), check)
