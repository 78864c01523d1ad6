"""Tabular data: CSV and benchmark loaders, and a synthetic generator with a dependence knob."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .events import CONTINUOUS, DISCRETE, VariableMeta

DOMAIN_MARGIN = 0.01


class DataError(ValueError):
    pass


@dataclass
class DataMatrix:
    """``n x m`` table; discrete columns hold integer codes ``0 .. d-1``.

    ``value_maps[j]`` lists the original labels of discrete column ``j`` by
    code when the column was not already integer coded (``None`` otherwise).
    """

    values: np.ndarray
    variables: list[VariableMeta]
    value_maps: list[list[str] | None] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.variables):
            raise DataError(f"values shape {self.values.shape} does not match {len(self.variables)} variables")
        if not self.value_maps:
            self.value_maps = [None] * len(self.variables)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def take(self, rows) -> "DataMatrix":
        return DataMatrix(self.values[rows], self.variables, self.value_maps)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DataMatrix) and self.variables == other.variables
                and self.value_maps == other.value_maps and np.array_equal(self.values, other.values))


def continuous_domain(col: np.ndarray) -> tuple[float, float]:
    """Observed range widened by 1% of its width on each side."""
    lo, hi = float(np.min(col)), float(np.max(col))
    width = hi - lo
    pad = DOMAIN_MARGIN * width if width > 0 else max(DOMAIN_MARGIN * abs(lo), DOMAIN_MARGIN)
    return lo - pad, hi + pad


def _parse_float(s: str):
    try:
        return float(s)
    except ValueError:
        return None


def load_csv(path, schema: Mapping[str, str] | None = None, like: Sequence[VariableMeta] | None = None) -> DataMatrix:
    """Read a headed, comma-separated UTF-8 file.

    Column kinds come from ``like`` (variables of an existing model, which also
    fixes cardinalities and domains), then ``schema`` (``name -> 'discrete' |
    'continuous'``), then inference: non-negative integer columns are discrete
    and identity coded, other numeric columns continuous, anything else
    discrete with labels coded in sorted order.
    """
    schema = dict(schema or {})
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            rows.append([c.strip() for c in row])
    if like is not None and [v.name for v in like] != header:
        raise DataError(f"{path}: columns {header} do not match model variables {[v.name for v in like]}")
    cols = list(zip(*rows)) if rows else [()] * len(header)
    values = np.empty((len(rows), len(header)))
    variables, maps = [], []
    for j, name in enumerate(header):
        col = cols[j]
        nums = [_parse_float(c) for c in col]
        numeric = all(x is not None for x in nums)
        if like is not None:
            kind = like[j].kind
        else:
            kind = schema.get(name)
            if kind is None:
                integral = numeric and all(float(x).is_integer() and x >= 0 for x in nums)
                kind = DISCRETE if integral or not numeric else CONTINUOUS
        if kind == CONTINUOUS:
            if not numeric:
                bad = next(i for i, x in enumerate(nums) if x is None)
                raise DataError(f"{path}:{bad + 2}: unparseable value {col[bad]!r} in column {name!r}")
            values[:, j] = nums
            if like is not None:
                variables.append(like[j])
            else:
                variables.append(VariableMeta.continuous(name, *continuous_domain(values[:, j])) if rows
                                 else VariableMeta.continuous(name, 0.0, 1.0))
            maps.append(None)
        elif numeric and all(float(x).is_integer() and x >= 0 for x in nums):
            values[:, j] = nums
            card = like[j].cardinality if like is not None else int(max(nums, default=0)) + 1
            if len(rows) and values[:, j].max() >= card:
                bad = int(np.argmax(values[:, j] >= card))
                raise DataError(f"{path}:{bad + 2}: value {col[bad]!r} outside domain of {name!r}")
            variables.append(VariableMeta.discrete(name, card))
            maps.append(None)
        else:
            if like is not None:
                raise DataError(f"{path}: column {name!r} is not integer coded")
            labels = sorted(set(col))
            code = {s: i for i, s in enumerate(labels)}
            values[:, j] = [code[c] for c in col]
            variables.append(VariableMeta.discrete(name, max(1, len(labels))))
            maps.append(labels)
    return DataMatrix(values, variables, maps)


def _format_value(x: float, var: VariableMeta, labels) -> str:
    if var.is_discrete:
        return labels[int(x)] if labels is not None else str(int(x))
    return repr(float(x))


def save_csv(data: DataMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(data.names)
        for row in data.values:
            w.writerow([_format_value(x, v, m) for x, v, m in zip(row, data.variables, data.value_maps)])


# -- benchmark triples --------------------------------------------------------

BENCHMARK_SPLITS = ("ts", "valid", "test")


def _load_binary(path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            row = []
            for c in cells:
                c = c.strip()
                if c not in ("0", "1"):
                    raise DataError(f"{path}:{lineno}: non-binary value {c!r}")
                row.append(int(c))
            if rows and len(row) != len(rows[0]):
                raise DataError(f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(row)}")
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: no rows")
    return np.asarray(rows, dtype=np.float64)


def load_benchmark(directory, name: str) -> tuple[DataMatrix, DataMatrix, DataMatrix]:
    """Load ``<name>.ts.data``, ``<name>.valid.data`` and ``<name>.test.data`` (0/1, no header)."""
    arrays = []
    for split in BENCHMARK_SPLITS:
        path = os.path.join(directory, f"{name}.{split}.data")
        if not os.path.exists(path):
            raise DataError(f"missing benchmark file {path}")
        arrays.append(_load_binary(path))
    m = arrays[0].shape[1]
    for split, a in zip(BENCHMARK_SPLITS, arrays):
        if a.shape[1] != m:
            raise DataError(f"{name}.{split}.data has {a.shape[1]} columns, expected {m}")
    variables = [VariableMeta.discrete(f"V{j}", 2) for j in range(m)]
    return tuple(DataMatrix(a, variables) for a in arrays)


# -- synthetic data -------------------------------------------------------------

@dataclass
class SyntheticSpec:
    """Grouped discrete data driven by one latent categorical variable per group.

    Every variable in a group is a monotone coarsening of the group's latent
    value; with probability ``noise_level`` it is resampled uniformly instead.
    Variables outside every group are independent uniforms.
    """

    n_rows: int
    n_vars: int
    domain_sizes: list[int]
    group_structure: list[list[int]]
    noise_level: float
    seed: int = 0
    latent_card: int | None = None

    def __post_init__(self):
        if len(self.domain_sizes) != self.n_vars:
            raise ValueError("domain_sizes must have one entry per variable")
        if any(d < 2 for d in self.domain_sizes):
            raise ValueError("domain sizes must be >= 2")
        seen: set = set()
        for g in self.group_structure:
            if seen & set(g):
                raise ValueError("groups must be disjoint")
            if any(not 0 <= v < self.n_vars for v in g):
                raise ValueError("group refers to an unknown variable")
            seen |= set(g)
        if not 0.0 <= self.noise_level <= 1.0:
            raise ValueError("noise_level must lie in [0, 1]")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SyntheticSpec":
        return cls(**json.loads(text))


def _group_maps(spec: SyntheticSpec, rng: np.random.Generator):
    """Per group: latent cardinality and, per variable, the code of each latent value."""
    out = []
    for g in spec.group_structure:
        k = spec.latent_card or max(spec.domain_sizes[v] for v in g)
        maps = {}
        for v in g:
            d = spec.domain_sizes[v]
            if d >= k:
                f = np.arange(k)
            else:
                cuts = np.sort(rng.choice(np.arange(1, k), size=d - 1, replace=False))
                f = np.searchsorted(cuts, np.arange(k), side="right")
            if rng.random() < 0.5:
                f = f.max() - f
            maps[v] = f
        out.append((k, maps))
    return out


def generate_synthetic(spec: SyntheticSpec) -> DataMatrix:
    rng = np.random.default_rng(spec.seed)
    groups = _group_maps(spec, rng)
    n = spec.n_rows
    values = np.empty((n, spec.n_vars))
    grouped = set()
    for g, (k, maps) in zip(spec.group_structure, groups):
        z = rng.integers(0, k, size=n)
        for v in g:
            x = maps[v][z]
            noisy = rng.random(n) < spec.noise_level
            x = np.where(noisy, rng.integers(0, spec.domain_sizes[v], size=n), x)
            values[:, v] = x
            grouped.add(v)
    for v in range(spec.n_vars):
        if v not in grouped:
            values[:, v] = rng.integers(0, spec.domain_sizes[v], size=n)
    variables = [VariableMeta.discrete(f"X{v}", d) for v, d in enumerate(spec.domain_sizes)]
    return DataMatrix(values, variables)


def synthetic_true_joint(spec: SyntheticSpec):
    """Exact joint distribution of :func:`generate_synthetic` as a JointTable."""
    from .evalharness import JOINT_LIMIT, JointTable

    size = int(np.prod(spec.domain_sizes, dtype=object))
    if size > JOINT_LIMIT:
        raise ValueError(f"joint lattice of {size} states exceeds {JOINT_LIMIT}")
    rng = np.random.default_rng(spec.seed)
    groups = _group_maps(spec, rng)
    eps = spec.noise_level
    joint = np.ones([1] * spec.n_vars)
    grouped = set()
    for g, (k, maps) in zip(spec.group_structure, groups):
        table = np.zeros([spec.domain_sizes[v] for v in g])
        for z in range(k):
            term = np.ones([1] * len(g))
            for a, v in enumerate(g):
                d = spec.domain_sizes[v]
                p = np.full(d, eps / d)
                p[maps[v][z]] += 1.0 - eps
                shape = [1] * len(g)
                shape[a] = d
                term = term * p.reshape(shape)
            table += term / k
        shape = [1] * spec.n_vars
        for v in g:
            shape[v] = spec.domain_sizes[v]
        # group axes are in group order; move them to variable order
        order = np.argsort(g)
        joint = joint * np.transpose(table, order).reshape(shape)
        grouped |= set(g)
    for v in range(spec.n_vars):
        if v not in grouped:
            shape = [1] * spec.n_vars
            shape[v] = spec.domain_sizes[v]
            joint = joint * np.full(shape, 1.0 / spec.domain_sizes[v])
    joint = np.broadcast_to(joint, spec.domain_sizes).copy()
    return JointTable(tuple(spec.domain_sizes), joint / joint.sum())
