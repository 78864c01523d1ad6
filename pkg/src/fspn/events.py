"""Variables, intervals and axis-aligned events.

An :class:`Event` holds exactly one :class:`Interval` per model variable, in
model variable order. Unconstrained variables carry their full domain.
Discrete intervals are always closed integer intervals; continuous ones keep
open/closed flags.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

DISCRETE = "discrete"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class VariableMeta:
    """A model variable.

    Discrete variables are coded ``0 .. cardinality-1``; continuous variables
    live on the closed interval ``[lo, hi]``.
    """

    name: str
    kind: str
    cardinality: int | None = None
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if self.kind == DISCRETE:
            if self.cardinality is None or self.cardinality < 1:
                raise ValueError(f"variable {self.name!r}: discrete cardinality must be >= 1")
        elif self.kind == CONTINUOUS:
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise ValueError(f"variable {self.name!r}: continuous domain needs lo < hi")
        else:
            raise ValueError(f"variable {self.name!r}: unknown kind {self.kind!r}")

    @classmethod
    def discrete(cls, name: str, cardinality: int) -> "VariableMeta":
        return cls(name, DISCRETE, cardinality=int(cardinality))

    @classmethod
    def continuous(cls, name: str, lo: float, hi: float) -> "VariableMeta":
        return cls(name, CONTINUOUS, lo=float(lo), hi=float(hi))

    @property
    def is_discrete(self) -> bool:
        return self.kind == DISCRETE

    def full_interval(self) -> "Interval":
        if self.is_discrete:
            return Interval(0, self.cardinality - 1)
        return Interval(self.lo, self.hi)

    def to_dict(self) -> dict:
        if self.is_discrete:
            return {"name": self.name, "kind": DISCRETE, "cardinality": self.cardinality}
        return {"name": self.name, "kind": CONTINUOUS, "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_dict(cls, d: Mapping) -> "VariableMeta":
        if d["kind"] == DISCRETE:
            return cls.discrete(d["name"], d["cardinality"])
        return cls.continuous(d["name"], d["lo"], d["hi"])


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    @property
    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and (self.lo_open or self.hi_open)

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lo_open = self.lo, self.lo_open
        elif other.lo > self.lo:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        if self.hi < other.hi:
            hi, hi_open = self.hi, self.hi_open
        elif other.hi < self.hi:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open or other.hi_open
        return Interval(lo, hi, lo_open, hi_open)

    def contains(self, x: float) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and self.lo_open:
            return False
        if x == self.hi and self.hi_open:
            return False
        return True

    def within(self, other: "Interval") -> bool:
        """True if this (non-empty) interval is a subset of ``other``."""
        return self.intersect(other) == self

    def to_list(self) -> list:
        return [self.lo, self.hi, self.lo_open, self.hi_open]

    @classmethod
    def from_list(cls, v: Sequence) -> "Interval":
        lo, hi, lo_open, hi_open = v
        return cls(lo, hi, bool(lo_open), bool(hi_open))

    def __str__(self) -> str:
        return f"{'(' if self.lo_open else '['}{self.lo:g}, {self.hi:g}{')' if self.hi_open else ']'}"


def normalize_interval(iv: Interval, var: VariableMeta) -> Interval:
    """Clip ``iv`` to the variable's domain; discrete intervals become closed.

    The result may be empty (check :attr:`Interval.empty`).
    """
    if var.is_discrete:
        d = var.cardinality
        # clamping to [-1, d] first keeps ceil/floor finite without changing the lattice hit
        lo = min(max(iv.lo, -1.0), float(d))
        hi = min(max(iv.hi, -1.0), float(d))
        ilo = math.ceil(lo)
        if iv.lo_open and ilo == lo:
            ilo += 1
        ihi = math.floor(hi)
        if iv.hi_open and ihi == hi:
            ihi -= 1
        ilo, ihi = max(ilo, 0), min(ihi, d - 1)
        return Interval(ilo, ihi) if ilo <= ihi else Interval(1, 0)
    lo, lo_open = (var.lo, False) if iv.lo <= var.lo else (iv.lo, iv.lo_open)
    hi, hi_open = (var.hi, False) if iv.hi >= var.hi else (iv.hi, iv.hi_open)
    return Interval(float(lo), float(hi), lo_open, hi_open)


def interval_volume(iv: Interval, var: VariableMeta) -> float:
    """Integer count for discrete intervals, length for continuous ones."""
    if iv.empty:
        return 0
    if var.is_discrete:
        return iv.hi - iv.lo + 1
    return iv.hi - iv.lo


class Event:
    """Axis-aligned hyper-rectangle over all model variables.

    Construct through :meth:`full`, :meth:`from_mapping` or :meth:`canonical`;
    all three clip to the variable domains.
    """

    __slots__ = ("intervals", "empty")

    def __init__(self, intervals: Sequence[Interval]):
        self.intervals = tuple(intervals)
        self.empty = any(iv.empty for iv in self.intervals)

    @classmethod
    def full(cls, variables: Sequence[VariableMeta]) -> "Event":
        return cls([v.full_interval() for v in variables])

    @classmethod
    def canonical(cls, intervals: Sequence[Interval], variables: Sequence[VariableMeta]) -> "Event":
        if len(intervals) != len(variables):
            raise ValueError(f"event has {len(intervals)} intervals for {len(variables)} variables")
        return cls([normalize_interval(iv, v) for iv, v in zip(intervals, variables)])

    @classmethod
    def from_mapping(cls, variables: Sequence[VariableMeta], constraints: Mapping) -> "Event":
        """Build an event from ``{index or name: Interval | (lo, hi) | value}``."""
        names = {v.name: i for i, v in enumerate(variables)}
        ivs = [v.full_interval() for v in variables]
        for key, c in constraints.items():
            if isinstance(key, str):
                if key not in names:
                    raise KeyError(f"unknown variable {key!r}")
                idx = names[key]
            else:
                idx = int(key)
                if not 0 <= idx < len(variables):
                    raise IndexError(f"variable index {idx} out of range")
            if isinstance(c, Interval):
                iv = c
            elif isinstance(c, tuple):
                iv = Interval(*c)
            else:
                iv = Interval(c, c)
            ivs[idx] = iv
        return cls.canonical(ivs, variables)

    @classmethod
    def point(cls, values: Iterable[float], variables: Sequence[VariableMeta]) -> "Event":
        return cls.canonical([Interval(x, x) for x in values], variables)

    def replace(self, updates: Mapping[int, Interval]) -> "Event":
        ivs = list(self.intervals)
        for i, iv in updates.items():
            ivs[i] = iv
        return Event(ivs)

    def __len__(self) -> int:
        return len(self.intervals)

    def __getitem__(self, i: int) -> Interval:
        return self.intervals[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Event) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        return "Event(" + ", ".join(str(iv) for iv in self.intervals) + ")"


def boxes_disjoint(a: Sequence[Interval], b: Sequence[Interval]) -> bool:
    return any(x.intersect(y).empty for x, y in zip(a, b))


def box_volume(box: Sequence[Interval], variables: Sequence[VariableMeta], dims: Iterable[int]) -> float:
    vol = 1.0
    for i in dims:
        vol *= interval_volume(box[i], variables[i])
    return vol
