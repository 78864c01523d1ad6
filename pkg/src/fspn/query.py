"""Text form of events and evidence queries.

One query per line::

    X1=1..7 X3=3..6
    X3=(5..6 | X1=2
    X4=..10) X2=3

Tokens are ``name=value`` or ``name=lo..hi``; an empty bound means
unbounded, a leading ``(`` makes the lower end open and a trailing ``)``
makes the upper end open. Variables not mentioned are unconstrained.
Everything after ``|`` is evidence. Blank lines and ``#`` comments are not
queries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .events import Event, Interval, VariableMeta


class QueryError(ValueError):
    pass


@dataclass
class Query:
    event: Event
    evidence: Event | None = None


def _bound(text: str, default: float) -> float:
    text = text.strip()
    if not text:
        return default
    try:
        return float(text)
    except ValueError:
        raise QueryError(f"bad number {text!r}") from None


def parse_token(token: str) -> tuple[str, Interval]:
    name, sep, spec = token.partition("=")
    if not sep or not name:
        raise QueryError(f"expected name=value, got {token!r}")
    lo_open = spec.startswith("(")
    hi_open = spec.endswith(")")
    body = spec[1 if lo_open else 0: len(spec) - (1 if hi_open else 0)]
    if ".." in body:
        a, b = body.split("..", 1)
        lo, hi = _bound(a, -math.inf), _bound(b, math.inf)
    else:
        if lo_open or hi_open:
            raise QueryError(f"open markers need a range: {token!r}")
        if not body:
            raise QueryError(f"missing value in {token!r}")
        lo = hi = _bound(body, 0.0)
    return name, Interval(lo, hi, lo_open, hi_open)


def parse_event(text: str, variables: Sequence[VariableMeta]) -> Event:
    constraints: dict[str, Interval] = {}
    for token in text.split():
        name, iv = parse_token(token)
        if name in constraints:
            constraints[name] = constraints[name].intersect(iv)
        else:
            constraints[name] = iv
    try:
        return Event.from_mapping(variables, constraints)
    except KeyError as e:
        raise QueryError(str(e.args[0])) from None


def parse_query(line: str, variables: Sequence[VariableMeta]) -> Query:
    head, bar, tail = line.partition("|")
    event = parse_event(head, variables)
    evidence = parse_event(tail, variables) if bar else None
    return Query(event, evidence)


def parse_queries(text: str, variables: Sequence[VariableMeta]) -> list[Query]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(parse_query(line, variables))
        except QueryError as e:
            raise QueryError(f"line {lineno}: {e}") from None
    return out


def format_interval(iv: Interval) -> str:
    lo = "" if math.isinf(iv.lo) else f"{iv.lo:g}"
    hi = "" if math.isinf(iv.hi) else f"{iv.hi:g}"
    if iv.lo == iv.hi and not (iv.lo_open or iv.hi_open):
        return lo
    return ("(" if iv.lo_open else "") + f"{lo}..{hi}" + (")" if iv.hi_open else "")


def format_event(event: Event, variables: Sequence[VariableMeta]) -> str:
    """Inverse of :func:`parse_event`, omitting full-domain variables."""
    toks = [f"{v.name}={format_interval(iv)}" for v, iv in zip(variables, event.intervals)
            if iv != v.full_interval()]
    return " ".join(toks)
