"""Hand-built example models used in tests, docs and the CLI smoke checks."""
from __future__ import annotations

from .events import Interval, VariableMeta
from .leaves import BinnedHistogram
from .model import Factorize, FspnModel, MultiLeaf, Product, Split, Sum, UniLeaf


def four_variable_example() -> FspnModel:
    """Four continuous variables on ``[0, 20]``.

    ``X1, X2`` are factorized out at the root; ``Pr(X3, X4)`` is a two-way
    mixture of products; ``Pr(X1, X2 | X3)`` splits on ``X3 <= 5`` into two
    multi-leaves. The bin masses are chosen so that

    * ``Pr(X3 in [3, 5])`` is 0.1 / 0.2 in the two mixture components,
    * ``Pr(X3 in (5, 6])`` is 0.3 overall,
    * ``Pr(X1 in [1, 7])`` is 0.3 / 0.4 in the two multi-leaves.
    """
    variables = [VariableMeta.continuous(f"X{i}", 0.0, 20.0) for i in range(1, 5)]
    x3_edges = [0.0, 3.0, 5.0, 6.0, 20.0]
    x4_edges = [0.0, 10.0, 20.0]
    l1 = UniLeaf(2, BinnedHistogram([x3_edges], [0.2, 0.1, 0.3, 0.4]))
    l2 = UniLeaf(3, BinnedHistogram([x4_edges], [0.5, 0.5]))
    l3 = UniLeaf(2, BinnedHistogram([x3_edges], [0.1, 0.2, 0.3, 0.4]))
    l4 = UniLeaf(3, BinnedHistogram([x4_edges], [0.25, 0.75]))
    n2 = Sum([Product([l1, l2]), Product([l3, l4])], [0.3, 0.7])

    full = tuple(v.full_interval() for v in variables)
    low = full[:2] + (Interval(0.0, 5.0),) + full[3:]
    high = full[:2] + (Interval(5.0, 20.0, lo_open=True),) + full[3:]
    x12_edges = [[0.0, 1.0, 7.0, 20.0], [0.0, 20.0]]
    l5 = MultiLeaf((0, 1), low, BinnedHistogram(x12_edges, [[0.2], [0.3], [0.5]]))
    l6 = MultiLeaf((0, 1), high, BinnedHistogram(x12_edges, [[0.1], [0.4], [0.5]]))
    n3 = Split([l5, l6], [low, high])
    return FspnModel(variables, Factorize(n2, n3, frozenset({0, 1}), frozenset({2, 3})))
