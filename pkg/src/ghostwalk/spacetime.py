"""Weighted spacetime DAGs, path enumeration and planarity checkers.

Vertices are opaque hashable labels.  Lattice graphs use ``(position, time)``
tuples; graphs loaded from files use strings.  The linear order on targets is
the vertex declaration order of the graph (see :meth:`SpacetimeGraph.order_key`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from typing import Hashable, Iterable, Sequence

from .errors import InvalidArgument, ResourceLimit

Vertex = Hashable
Path = tuple  # tuple of vertices (v_0, ..., v_l)

DEFAULT_PATH_CAP = 10**6


class SpacetimeGraph:
    """Immutable weighted DAG.

    ``times`` optionally assigns an integer time to every vertex; when omitted
    the longest-path depth from a root is used.  Times order crossings in the
    involution machinery, ties being broken elsewhere.
    """

    def __init__(
        self,
        vertices: Iterable[Vertex],
        edges: Iterable[tuple[Vertex, Vertex, Fraction]],
        times: dict[Vertex, int] | None = None,
    ):
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        self._index = {v: i for i, v in enumerate(self.vertices)}
        if len(self._index) != len(self.vertices):
            raise InvalidArgument("vertex labels must be unique")
        self.edges: tuple[tuple[Vertex, Vertex, Fraction], ...] = tuple(
            (u, v, Fraction(w)) for u, v, w in edges
        )
        self._out: dict[Vertex, list[tuple[Vertex, Fraction]]] = {v: [] for v in self.vertices}
        self._in: dict[Vertex, list[tuple[Vertex, Fraction]]] = {v: [] for v in self.vertices}
        self._weight: dict[tuple[Vertex, Vertex], Fraction] = {}
        for u, v, w in self.edges:
            if u not in self._index or v not in self._index:
                raise InvalidArgument(f"edge ({u!r}, {v!r}) references an unknown vertex")
            if (u, v) in self._weight:
                raise InvalidArgument(f"duplicate edge ({u!r}, {v!r})")
            self._out[u].append((v, w))
            self._in[v].append((u, w))
            self._weight[(u, v)] = w

        sorter = TopologicalSorter({v: [u for u, _ in self._in[v]] for v in self.vertices})
        try:
            order = list(sorter.static_order())
        except CycleError as exc:
            raise InvalidArgument(f"edge relation has a cycle: {exc.args[1]}") from None
        # deterministic: stable w.r.t. declaration order inside each layer
        depth: dict[Vertex, int] = {}
        for v in order:
            depth[v] = max((depth[u] + 1 for u, _ in self._in[v]), default=0)
        self.topological_order: tuple[Vertex, ...] = tuple(
            sorted(self.vertices, key=lambda v: (depth[v], self._index[v]))
        )
        self._topo_pos = {v: i for i, v in enumerate(self.topological_order)}
        if times is None:
            self._time = depth
        else:
            self._time = dict(times)
            for u, v, _ in self.edges:
                if not self._time[u] < self._time[v]:
                    raise InvalidArgument(f"times not increasing along edge ({u!r}, {v!r})")
        self._from_cache: dict[Vertex, dict[Vertex, Fraction]] = {}
        self._reach_cache: dict[Vertex, frozenset] = {}

    def __repr__(self) -> str:
        return f"SpacetimeGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def __contains__(self, v: Vertex) -> bool:
        return v in self._index

    def check_vertex(self, v: Vertex) -> None:
        if v not in self._index:
            raise InvalidArgument(f"unknown vertex {v!r}")

    def successors(self, v: Vertex) -> list[tuple[Vertex, Fraction]]:
        return self._out[v]

    def predecessors(self, v: Vertex) -> list[tuple[Vertex, Fraction]]:
        return self._in[v]

    def edge_weight(self, u: Vertex, v: Vertex) -> Fraction:
        try:
            return self._weight[(u, v)]
        except KeyError:
            raise InvalidArgument(f"no edge ({u!r}, {v!r})") from None

    def time(self, v: Vertex) -> int:
        return self._time[v]

    def order_key(self, v: Vertex) -> int:
        """Rank of ``v`` in the declaration order; this is the target order."""
        return self._index[v]

    def weights_from(self, x: Vertex) -> dict[Vertex, Fraction]:
        """All nonzero-support values ``W(x -> y)`` as a dict keyed by ``y``."""
        self.check_vertex(x)
        cached = self._from_cache.get(x)
        if cached is not None:
            return cached
        acc: dict[Vertex, Fraction] = {x: Fraction(1)}
        start = self._topo_pos[x]
        for v in self.topological_order[start:]:
            wv = acc.get(v)
            if wv is None:
                continue
            for u, w in self._out[v]:
                acc[u] = acc.get(u, Fraction(0)) + wv * w
        self._from_cache[x] = acc
        return acc

    def reaches(self, y: Vertex) -> frozenset:
        """Vertices with a directed path to ``y`` (including ``y``)."""
        cached = self._reach_cache.get(y)
        if cached is None:
            seen = {y}
            stack = [y]
            while stack:
                v = stack.pop()
                for u, _ in self._in[v]:
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
            cached = self._reach_cache[y] = frozenset(seen)
        return cached


@dataclass(frozen=True)
class Configuration:
    """Ordered sources and targets.  Tuple order is the linear order."""

    sources: tuple
    targets: tuple
    horizon: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "targets", tuple(self.targets))
        for name in ("sources", "targets"):
            seq = getattr(self, name)
            if len(set(seq)) != len(seq):
                raise InvalidArgument(f"{name} must be pairwise distinct")


def build_lattice_graph(
    lo: int, hi: int, horizon: int, step_weight: Fraction = Fraction(1, 2)
) -> SpacetimeGraph:
    """The +-1 walk on the integer interval ``[lo, hi]`` for ``horizon`` steps.

    Vertices are ``(position, time)``, declared time-major so that the target
    order at a fixed time is the order of positions.  Edges leaving the
    interval are dropped.
    """
    if hi < lo:
        raise InvalidArgument(f"empty interval [{lo}, {hi}]")
    if horizon < 0:
        raise InvalidArgument("horizon must be >= 0")
    step_weight = Fraction(step_weight)
    vertices = [(p, t) for t in range(horizon + 1) for p in range(lo, hi + 1)]
    edges = [
        ((p, t), (q, t + 1), step_weight)
        for t in range(horizon)
        for p in range(lo, hi + 1)
        for q in (p - 1, p + 1)
        if lo <= q <= hi
    ]
    return SpacetimeGraph(vertices, edges, times={v: v[1] for v in vertices})


def path_generating_function(graph: SpacetimeGraph, x: Vertex, y: Vertex) -> Fraction:
    graph.check_vertex(y)
    return graph.weights_from(x).get(y, Fraction(0))


def path_weight(graph: SpacetimeGraph, path: Sequence[Vertex]) -> Fraction:
    w = Fraction(1)
    for u, v in zip(path, path[1:]):
        w *= graph.edge_weight(u, v)
    return w


def enumerate_paths(
    graph: SpacetimeGraph, x: Vertex, y: Vertex, cap: int = DEFAULT_PATH_CAP
) -> list[Path]:
    """Every directed path from ``x`` to ``y``; raises :class:`ResourceLimit` past ``cap``."""
    graph.check_vertex(x)
    graph.check_vertex(y)
    useful = graph.reaches(y)
    if x not in useful:
        return []
    out: list[Path] = []
    stack: list[tuple[Vertex, ...]] = [(x,)]
    while stack:
        path = stack.pop()
        v = path[-1]
        if v == y:
            out.append(path)
            if len(out) > cap:
                raise ResourceLimit(f"path enumeration exceeded cap={cap} for {x!r} -> {y!r}")
            continue
        for u, _ in reversed(graph.successors(v)):
            if u in useful:
                stack.append(path + (u,))
    return out


def paths_to_targets(
    graph: SpacetimeGraph, x: Vertex, targets: Iterable[Vertex], cap: int = DEFAULT_PATH_CAP
) -> list[Path]:
    out: list[Path] = []
    for y in targets:
        out.extend(enumerate_paths(graph, x, y, cap))
        if len(out) > cap:
            raise ResourceLimit(f"path enumeration exceeded cap={cap} from {x!r}")
    return out


@dataclass
class PlanarityReport:
    property: str
    holds: bool
    checked: int
    violations: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "holds": self.holds,
            "checked": self.checked,
            "violations": self.violations,
        }


def check_crossing_property(
    graph: SpacetimeGraph, config: Configuration, cap: int = DEFAULT_PATH_CAP
) -> PlanarityReport:
    """Swapped-endpoint paths must share a vertex (P1).

    One witness path pair is reported per violating quadruple.
    """
    src, tgt = config.sources, config.targets
    cache: dict[tuple, list[Path]] = {}

    def paths(a, b):
        if (a, b) not in cache:
            cache[(a, b)] = enumerate_paths(graph, a, b, cap)
        return cache[(a, b)]

    violations = []
    checked = 0
    for i, j in itertools.combinations(range(len(src)), 2):
        x, x2 = src[i], src[j]
        for p, q in itertools.combinations(range(len(tgt)), 2):
            y2, y = tgt[p], tgt[q]
            checked += 1
            witness = None
            for left in paths(x, y):
                left_set = set(left)
                for right in paths(x2, y2):
                    if left_set.isdisjoint(right):
                        witness = (left, right)
                        break
                if witness:
                    break
            if witness:
                violations.append(
                    {
                        "x": x,
                        "x_prime": x2,
                        "y": y,
                        "y_prime": y2,
                        "path_x_y": list(witness[0]),
                        "path_xprime_yprime": list(witness[1]),
                    }
                )
    return PlanarityReport("crossing", not violations, checked, violations)


def check_consecutive_collision_property(
    graph: SpacetimeGraph, config: Configuration, cap: int = DEFAULT_PATH_CAP
) -> PlanarityReport:
    """Non-adjacent sources cannot meet unless the middle one interferes first (P2).

    Paths run from each source to any configured target.  For every triple
    ``x < x' < x''``, every vertex ``v`` shared by an ``x``-path and an
    ``x''``-path, every ``x'``-path must contain ``v`` or meet one of the two
    paths strictly before ``v``.
    """
    src, tgt = config.sources, config.targets
    if len(src) < 3:
        return PlanarityReport("consecutive_collision", True, 0)
    full = {x: paths_to_targets(graph, x, tgt, cap) for x in src}
    violations = []
    checked = 0
    for i, j, l in itertools.combinations(range(len(src)), 3):
        x, xm, xr = src[i], src[j], src[l]
        middle = [set(p) for p in full[xm]]
        for pl in full[x]:
            pos_l = {v: idx for idx, v in enumerate(pl)}
            for pr in full[xr]:
                for idx_r, v in enumerate(pr):
                    if v not in pos_l:
                        continue
                    checked += 1
                    before = set(pl[: pos_l[v]]) | set(pr[:idx_r])
                    for pm_set, pm in zip(middle, full[xm]):
                        if v in pm_set or not before.isdisjoint(pm_set):
                            continue
                        violations.append(
                            {
                                "x": x,
                                "x_middle": xm,
                                "x_right": xr,
                                "meeting_vertex": v,
                                "path_x": list(pl),
                                "path_x_right": list(pr),
                                "path_x_middle": list(pm),
                            }
                        )
                        break
    return PlanarityReport("consecutive_collision", not violations, checked, violations)


@dataclass(frozen=True)
class LatticeInstance:
    """Padded lattice for walkers started at ``starts`` and run ``t`` steps.

    ``targets`` lists every final-time site of the walkers' common parity.
    """

    starts: tuple[int, ...]
    t: int
    graph: SpacetimeGraph
    sources: tuple
    targets: tuple

    def vertex(self, position: int) -> tuple[int, int]:
        return (position, self.t)


def lattice_instance(
    starts: Sequence[int],
    t: int,
    step_weight: Fraction = Fraction(1, 2),
    same_parity: bool = True,
) -> LatticeInstance:
    """``same_parity=False`` admits mixed-parity starts so the planarity
    checkers can exhibit the resulting violations; targets then cover every
    final-time site."""
    starts = tuple(int(s) for s in starts)
    validate_starts(starts, same_parity)
    if t < 0:
        raise InvalidArgument("horizon must be >= 0")
    lo, hi = starts[0] - t, starts[-1] + t
    graph = build_lattice_graph(lo, hi, t, step_weight)
    sources = tuple((x, 0) for x in starts)
    parity = (starts[0] + t) % 2
    targets = tuple((q, t) for q in range(lo, hi + 1) if not same_parity or q % 2 == parity)
    return LatticeInstance(starts, t, graph, sources, targets)


def validate_starts(starts: Sequence[int], same_parity: bool = True) -> None:
    if not starts:
        raise InvalidArgument("at least one start position is required")
    if any(b <= a for a, b in zip(starts, starts[1:])):
        raise InvalidArgument(f"starts must be strictly increasing: {list(starts)}")
    if same_parity and len({s % 2 for s in starts}) > 1:
        raise InvalidArgument(f"starts must share one parity: {list(starts)}")
