"""Pairwise annihilation weights and the Pfaffian coalescence formula."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Sequence

from .errors import InvalidArgument
from .spacetime import SpacetimeGraph

AntisymmetricMatrix = list[list[Fraction]]


def pairwise_weight(
    graph: SpacetimeGraph,
    x_left,
    x_right,
    targets: Sequence,
    key: Callable | None = None,
) -> Fraction:
    """Twice the weight of strictly crossed endpoint pairs plus the coincident ones.

    ``targets`` may be given in any order; ``key`` (default: graph order)
    decides which of two final vertices lies further left.
    """
    key = key or graph.order_key
    wl = graph.weights_from(x_left)
    wr = graph.weights_from(x_right)
    ordered = sorted(targets, key=key)
    total = Fraction(0)
    for i, a in enumerate(ordered):
        right_a = wr.get(a)
        if not right_a:
            continue
        total += wl.get(a, Fraction(0)) * right_a
        crossed = sum((wl.get(b, Fraction(0)) for b in ordered[i + 1 :]), Fraction(0))
        total += 2 * crossed * right_a
    return total


def build_antisymmetric(
    graph: SpacetimeGraph, sources: Sequence, targets: Sequence, key: Callable | None = None
) -> AntisymmetricMatrix:
    n = len(sources)
    a = [[Fraction(0)] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        a[i][j] = pairwise_weight(graph, sources[i], sources[j], targets, key)
        a[j][i] = -a[i][j]
    return a


def check_antisymmetric(a: Sequence[Sequence]) -> None:
    n = len(a)
    if any(len(row) != n for row in a):
        raise InvalidArgument("matrix must be square")
    for i in range(n):
        if a[i][i] != 0:
            raise InvalidArgument(f"nonzero diagonal entry at {i}")
        for j in range(i + 1, n):
            if a[i][j] != -a[j][i]:
                raise InvalidArgument(f"A[{i}][{j}] != -A[{j}][{i}]")


def pfaffian(a: Sequence[Sequence]) -> Fraction:
    """Signed sum over perfect matchings, expanding along the first row."""
    check_antisymmetric(a)
    if len(a) % 2:
        raise InvalidArgument(f"Pfaffian needs even dimension, got {len(a)}")
    return _expand(a, tuple(range(len(a))))


def _expand(a, idx: tuple[int, ...]):
    if not idx:
        return Fraction(1)
    first, rest = idx[0], idx[1:]
    total = Fraction(0)
    for pos, partner in enumerate(rest):
        entry = a[first][partner]
        if not entry:
            continue
        sign = -1 if pos % 2 else 1
        total += sign * entry * _expand(a, rest[:pos] + rest[pos + 1 :])
    return total


def pairwise_coalescence_weight(
    graph: SpacetimeGraph, sources: Sequence, targets: Sequence, key: Callable | None = None
) -> Fraction:
    if len(sources) % 2:
        raise InvalidArgument("pairwise coalescence needs an even number of sources")
    return pfaffian(build_antisymmetric(graph, sources, targets, key))
