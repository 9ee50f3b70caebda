"""Final states, the ghost matrix, and the annihilation weight.

The formal variables attached to ghost columns are never materialised.  For
ghost pair ``j`` every Leibniz term carries exactly one ``tau+`` (from column
``(j,1)``) and one ``tau-`` (from column ``(j,2)``); their product is
``-t+`` when the actor in column ``(j,1)`` has the larger index and ``t-``
otherwise.  Extracting the coefficient of ``t^eps`` therefore keeps a
bijection iff its within-pair actor order matches ``eps`` (a candidate), and
multiplies it by ``-1`` per pair whose ``(j,1)`` actor is the larger one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Hashable, Iterable, Sequence

from .errors import InvalidArgument, ResourceLimit
from .linalg import determinant, permutation_sign
from .spacetime import SpacetimeGraph

MAX_LEIBNIZ_N = 8

Key = Callable[[Hashable], object]


def _identity(v):
    return v


@dataclass(frozen=True)
class FinalState:
    """``k`` ghost pairs ``(a_j, b_j)`` plus ``n - 2k`` survivor positions."""

    survivors: tuple = ()
    ghost_pairs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "survivors", tuple(self.survivors))
        object.__setattr__(self, "ghost_pairs", tuple(tuple(p) for p in self.ghost_pairs))
        for pair in self.ghost_pairs:
            if len(pair) != 2:
                raise InvalidArgument(f"ghost pair must have two positions: {pair!r}")

    @property
    def k(self) -> int:
        return len(self.ghost_pairs)

    @property
    def s(self) -> int:
        return len(self.survivors)

    @property
    def n(self) -> int:
        return self.s + 2 * self.k

    def positions(self) -> tuple:
        """Column positions: survivors, then ``a_1, b_1, ..., a_k, b_k``."""
        return self.survivors + tuple(v for pair in self.ghost_pairs for v in pair)

    def validate(self, key: Key | None = None) -> None:
        key = key or _identity
        ranks = [key(y) for y in self.survivors]
        if any(not r1 < r2 for r1, r2 in zip(ranks, ranks[1:])):
            raise InvalidArgument(f"survivors must be strictly increasing: {self.survivors!r}")

    def sign(self, key: Key | None = None) -> int:
        out = 1
        for e in ghost_signs(self, key):
            out *= e
        return out


def ghost_signs(state: FinalState, key: Key | None = None) -> list[int]:
    """``+1`` when ``a_j`` precedes or equals ``b_j``, else ``-1``."""
    key = key or _identity
    return [1 if a == b or key(a) < key(b) else -1 for a, b in state.ghost_pairs]


def column_role(column: int, s: int) -> tuple:
    """``("survivor", l)`` or ``("ghost", j, m)``, all 1-based."""
    if column < s:
        return ("survivor", column + 1)
    j, m = divmod(column - s, 2)
    return ("ghost", j + 1, m + 1)


def ghost_columns(s: int, j: int) -> tuple[int, int]:
    """0-based column indices of slots ``(j,1)`` and ``(j,2)`` for 0-based pair ``j``."""
    return s + 2 * j, s + 2 * j + 1


def is_candidate(perm: Sequence[int], s: int, signs: Sequence[int]) -> bool:
    inverse = {c: actor for actor, c in enumerate(perm)}
    for j, eps in enumerate(signs):
        c1, c2 = ghost_columns(s, j)
        higher_first = inverse[c1] > inverse[c2]
        if higher_first != (eps == 1):
            return False
    return True


def formal_sign(perm: Sequence[int], s: int, k: int) -> int:
    """``-1`` for every pair whose slot ``(j,1)`` actor outranks its slot ``(j,2)`` actor."""
    inverse = {c: actor for actor, c in enumerate(perm)}
    sign = 1
    for j in range(k):
        c1, c2 = ghost_columns(s, j)
        if inverse[c1] > inverse[c2]:
            sign = -sign
    return sign


def candidate_bijections(state: FinalState, n: int, key: Key | None = None) -> list[tuple[int, ...]]:
    """Candidate bijections as tuples ``perm[actor] = column`` (0-based)."""
    if state.n != n:
        raise InvalidArgument(f"state has s + 2k = {state.n}, expected n = {n}")
    if n > MAX_LEIBNIZ_N:
        raise ResourceLimit(f"Leibniz enumeration limited to n <= {MAX_LEIBNIZ_N}")
    signs = ghost_signs(state, key)
    return [p for p in itertools.permutations(range(n)) if is_candidate(p, state.s, signs)]


@dataclass(frozen=True)
class SignedWeight:
    sign: int
    magnitude: Fraction

    @property
    def value(self) -> Fraction:
        return self.sign * self.magnitude


@dataclass(frozen=True)
class GhostMatrix:
    """Plain weights ``W(x_I -> column position)`` with a tag per column."""

    bases: tuple[tuple[Fraction, ...], ...]
    tags: tuple[tuple, ...]
    signs: tuple[int, ...]
    s: int
    k: int

    @property
    def n(self) -> int:
        return len(self.bases)

    def base(self, row: int, column: int) -> Fraction:
        return self.bases[row][column]


def build_matrix(
    graph: SpacetimeGraph, sources: Sequence, state: FinalState, key: Key | None = None
) -> GhostMatrix:
    """Ghost matrix for ``state``; ``key`` defaults to the graph's target order."""
    n = len(sources)
    if state.n != n:
        raise InvalidArgument(f"{n} sources but state has s + 2k = {state.n}")
    key = key or graph.order_key
    state.validate(key)
    positions = state.positions()
    for v in positions:
        graph.check_vertex(v)
    bases = tuple(
        tuple(graph.weights_from(x).get(y, Fraction(0)) for y in positions) for x in sources
    )
    tags = tuple(column_role(c, state.s) for c in range(n))
    return GhostMatrix(bases, tags, tuple(ghost_signs(state, key)), state.s, state.k)


def leibniz_terms(matrix: GhostMatrix) -> Iterable[tuple[tuple[int, ...], SignedWeight]]:
    """Surviving terms of the coefficient extraction, one per candidate bijection."""
    n, s, k = matrix.n, matrix.s, matrix.k
    if n > MAX_LEIBNIZ_N:
        raise ResourceLimit(f"Leibniz enumeration limited to n <= {MAX_LEIBNIZ_N}")
    for perm in itertools.permutations(range(n)):
        if not is_candidate(perm, s, matrix.signs):
            continue
        magnitude = Fraction(1)
        for row, col in enumerate(perm):
            magnitude *= matrix.bases[row][col]
            if not magnitude:
                break
        yield perm, SignedWeight(formal_sign(perm, s, k) * permutation_sign(perm), magnitude)


def annihilation_weight(matrix: GhostMatrix) -> Fraction:
    """Total weight of performances with the matrix's final state."""
    total = sum((term.value for _, term in leibniz_terms(matrix)), Fraction(0))
    return total / factorial(matrix.k)


def final_state_weight(
    graph: SpacetimeGraph, sources: Sequence, state: FinalState, key: Key | None = None
) -> Fraction:
    return annihilation_weight(build_matrix(graph, sources, state, key))


def annihilation_weight_laplace(
    graph: SpacetimeGraph, sources: Sequence, state: FinalState, key: Key | None = None
) -> Fraction:
    """Single-collision weight via Laplace expansion along the two ghost columns."""
    if state.k != 1:
        raise InvalidArgument(f"Laplace cross-check needs k = 1, got k = {state.k}")
    n = len(sources)
    if state.n != n:
        raise InvalidArgument(f"{n} sources but state has s + 2k = {state.n}")
    key = key or graph.order_key
    state.validate(key)
    (a, b), = state.ghost_pairs
    hi, lo = (b, a) if a == b or key(a) < key(b) else (a, b)
    w = [graph.weights_from(x) for x in sources]
    total = Fraction(0)
    for i, j in itertools.combinations(range(n), 2):
        # 1-based (-1)^(I+J+1) equals 0-based (-1)^(i+j+1)
        sign = -1 if (i + j) % 2 == 0 else 1
        head = w[i].get(hi, Fraction(0)) * w[j].get(lo, Fraction(0))
        if not head:
            continue
        rest = [r for r in range(n) if r not in (i, j)]
        minor = [[w[r].get(y, Fraction(0)) for y in state.survivors] for r in rest]
        total += sign * head * determinant(minor)
    return total


def plain_determinant(graph: SpacetimeGraph, sources: Sequence, targets: Sequence) -> Fraction:
    """``det(W(x_I -> y_l))`` computed by elimination."""
    return determinant([[graph.weights_from(x).get(y, Fraction(0)) for y in targets] for x in sources])


def enumerate_final_states(targets: Sequence, n: int) -> Iterable[FinalState]:
    """Every final state over ``targets`` (listed in increasing order) for ``n`` walkers."""
    for k in range(n // 2 + 1):
        s = n - 2 * k
        ordered_pairs = list(itertools.product(targets, repeat=2))
        for survivors in itertools.combinations(targets, s):
            for pairs in itertools.product(ordered_pairs, repeat=k):
                yield FinalState(survivors, pairs)


def state_sort_key(state: FinalState, key: Key | None = None):
    key = key or _identity
    return (
        state.k,
        [key(y) for y in state.survivors],
        [(key(a), key(b)) for a, b in state.ghost_pairs],
    )
