"""JSON encodings.  Rationals are always written as ``"p/q"`` strings."""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Callable, Sequence

from .dynamics import DistributionTable
from .errors import InvalidArgument
from .ghostdet import FinalState
from .spacetime import SpacetimeGraph, build_lattice_graph

_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")


def fmt(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    m = _RATIONAL.match(str(text))
    if not m:
        raise InvalidArgument(f"not a rational 'p/q': {text!r}")
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise InvalidArgument(f"zero denominator in {text!r}")
    return Fraction(num, den)


def graph_from_json(data: dict) -> SpacetimeGraph:
    if "lattice" in data:
        spec = data["lattice"]
        return build_lattice_graph(
            int(spec["min"]), int(spec["max"]), int(spec["horizon"]), parse_rational(spec.get("step_w", "1/2"))
        )
    try:
        vertices = [str(v["id"]) for v in data["vertices"]]
        edges = [(str(e["from"]), str(e["to"]), parse_rational(e["w"])) for e in data["edges"]]
    except (KeyError, TypeError) as exc:
        raise InvalidArgument(f"malformed graph specification: {exc}") from None
    return SpacetimeGraph(vertices, edges)


def graph_to_json(graph: SpacetimeGraph, label: Callable = str) -> dict:
    return {
        "vertices": [{"id": label(v)} for v in graph.vertices],
        "edges": [{"from": label(u), "to": label(v), "w": fmt(w)} for u, v, w in graph.edges],
    }


def load_graph(path) -> tuple[SpacetimeGraph, dict]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return graph_from_json(data), data


def state_to_json(state: FinalState, label: Callable = lambda v: v) -> dict:
    return {
        "k": state.k,
        "survivors": [label(y) for y in state.survivors],
        "ghost_pairs": [[label(a), label(b)] for a, b in state.ghost_pairs],
    }


def state_from_json(data: dict, vertex: Callable = lambda v: v) -> FinalState:
    state = FinalState(
        tuple(vertex(y) for y in data.get("survivors", [])),
        tuple((vertex(a), vertex(b)) for a, b in data.get("ghost_pairs", [])),
    )
    if "k" in data and int(data["k"]) != state.k:
        raise InvalidArgument(f"k={data['k']} but {state.k} ghost pairs listed")
    return state


def table_records(table: DistributionTable, label: Callable = lambda v: v) -> list[dict]:
    return [{"state": state_to_json(s, label), "p": fmt(p)} for s, p in table.items()]


def matrix_to_json(rows: Sequence[Sequence]) -> dict:
    return {"dim": len(rows), "entries": [fmt(x) for row in rows for x in row]}


def matrix_from_json(data: dict) -> list[list[Fraction]]:
    n = int(data["dim"])
    entries = [parse_rational(x) for x in data["entries"]]
    if len(entries) != n * n:
        raise InvalidArgument(f"expected {n * n} entries, got {len(entries)}")
    return [entries[i * n : (i + 1) * n] for i in range(n)]


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_default)


def _default(obj):
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")
