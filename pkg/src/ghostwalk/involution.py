"""Castings, rehearsal, attribution and the sign-reversing involution.

Everything here is executable bookkeeping for the cancellation argument:
candidate castings come from the Leibniz expansion, rehearsal scans path
crossings in time order, attribution glues collision diagrams to ghost paths,
and segment swaps pair the failed castings so that they cancel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

from . import ghostdet
from .errors import InvalidArgument, ResourceLimit
from .ghostdet import FinalState, column_role, ghost_columns, ghost_signs, is_candidate
from .linalg import permutation_sign
from .spacetime import DEFAULT_PATH_CAP, Path, SpacetimeGraph, enumerate_paths, path_weight

DEFAULT_CASTING_CAP = 10**6


@dataclass(frozen=True, eq=False)
class Stage:
    """Graph, sources and final state shared by every casting of one audit."""

    graph: SpacetimeGraph
    sources: tuple
    state: FinalState
    key: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if self.key is None:
            object.__setattr__(self, "key", self.graph.order_key)
        if self.state.n != len(self.sources):
            raise InvalidArgument(f"{len(self.sources)} sources but state has s + 2k = {self.state.n}")
        self.state.validate(self.key)
        object.__setattr__(self, "positions", self.state.positions())
        object.__setattr__(self, "signs", tuple(ghost_signs(self.state, self.key)))

    @property
    def n(self) -> int:
        return len(self.sources)

    @property
    def s(self) -> int:
        return self.state.s

    @property
    def k(self) -> int:
        return self.state.k

    def pair_of(self, column: int) -> int | None:
        """0-based ghost pair index of a column, or None for survivor columns."""
        return None if column < self.s else (column - self.s) // 2


@dataclass(frozen=True)
class Casting:
    """Bijection ``pi[actor] = column`` plus one free path per actor."""

    stage: Stage = field(compare=False, repr=False)
    pi: tuple[int, ...]
    paths: tuple[Path, ...]

    def __post_init__(self):
        st = self.stage
        if sorted(self.pi) != list(range(st.n)):
            raise InvalidArgument(f"pi is not a bijection onto columns: {self.pi}")
        for actor, (col, path) in enumerate(zip(self.pi, self.paths)):
            if path[0] != st.sources[actor] or path[-1] != st.positions[col]:
                raise InvalidArgument(f"path of actor {actor + 1} has the wrong endpoints")

    @property
    def sign(self) -> int:
        return permutation_sign(self.pi)

    @property
    def path_product(self) -> Fraction:
        out = Fraction(1)
        for p in self.paths:
            out *= path_weight(self.stage.graph, p)
        return out

    @property
    def weight(self) -> Fraction:
        return self.path_product / factorial(self.stage.k)

    @property
    def candidate(self) -> bool:
        return is_candidate(self.pi, self.stage.s, self.stage.signs)

    def roles(self) -> list[tuple]:
        return [column_role(c, self.stage.s) for c in self.pi]


@dataclass(frozen=True)
class PerformanceCollision:
    vertex: object
    actors: tuple[int, int]  # 0-based, increasing
    pair: int  # 0-based ghost pair label


@dataclass(frozen=True)
class Performance:
    """Role-based description: diagram paths, labelled collisions, ordered ghost paths.

    ``diagram[I]`` runs from ``x_I`` to its collision vertex or to its
    survivor position; ``ghost_paths[j]`` is ``(path to a_j, path to b_j)``.
    """

    stage: Stage = field(compare=False, repr=False)
    diagram: tuple[Path, ...]
    collisions: tuple[PerformanceCollision, ...]
    ghost_paths: tuple[tuple[Path, Path], ...]

    @property
    def weight(self) -> Fraction:
        g = self.stage.graph
        w = Fraction(1)
        for p in self.diagram:
            w *= path_weight(g, p)
        for p1, p2 in self.ghost_paths:
            w *= path_weight(g, p1) * path_weight(g, p2)
        return w / factorial(self.stage.k)


@dataclass(frozen=True)
class RehearsalResult:
    """Success carries the performance; failure the first spurious crossing.

    A failure with ``stalled=True`` means no crossing was left while some
    active actor was still destined for a ghost slot, which planar
    configurations rule out.
    """

    success: bool
    performance: Performance | None = None
    crossing: tuple | None = None  # (I, J, vertex), 0-based actors
    collisions: tuple = ()
    stalled: bool = False


def enumerate_candidate_castings(
    graph: SpacetimeGraph,
    sources: Sequence,
    state: FinalState,
    key: Callable | None = None,
    cap: int = DEFAULT_CASTING_CAP,
    path_cap: int = DEFAULT_PATH_CAP,
) -> list[Casting]:
    stage = Stage(graph, tuple(sources), state, key)
    cache: dict[tuple, list[Path]] = {}

    def paths(actor: int, col: int) -> list[Path]:
        pair = (actor, col)
        if pair not in cache:
            cache[pair] = enumerate_paths(graph, stage.sources[actor], stage.positions[col], path_cap)
        return cache[pair]

    out: list[Casting] = []
    for pi in ghostdet.candidate_bijections(state, stage.n, stage.key):
        for family in itertools.product(*(paths(i, c) for i, c in enumerate(pi))):
            out.append(Casting(stage, pi, family))
            if len(out) > cap:
                raise ResourceLimit(f"candidate casting enumeration exceeded cap={cap}")
    return out


def first_crossing(
    paths: dict[int, Path] | Sequence[Path],
    active: Sequence[int] | None = None,
    time: Callable | None = None,
) -> tuple[int, int, object] | None:
    """Earliest shared vertex among active paths, ties broken by the smallest pair.

    ``time`` maps a vertex to its time; by default a vertex's index along the
    path is used, which is right when all paths start at a common time.
    """
    if not isinstance(paths, dict):
        paths = dict(enumerate(paths))
    actors = sorted(paths if active is None else active)
    best = None
    for i, j in itertools.combinations(actors, 2):
        other = set(paths[j])
        for idx, v in enumerate(paths[i]):
            if v in other:
                when = time(v) if time else idx
                cand = (when, i, j)
                if best is None or cand < best[0]:
                    best = (cand, v)
                break
    if best is None:
        return None
    (_, i, j), v = best
    return i, j, v


def _is_valid_collision(stage: Stage, casting: Casting, i: int, j: int) -> int | None:
    """Ghost pair that ``i`` and ``j`` fill together, or None for a spurious crossing."""
    pi, pj = stage.pair_of(casting.pi[i]), stage.pair_of(casting.pi[j])
    if pi is None or pi != pj:
        return None
    return pi


def rehearse(casting: Casting) -> RehearsalResult:
    stage = casting.stage
    if not casting.candidate:
        raise InvalidArgument(f"rehearsal needs a candidate casting, got pi={casting.pi}")
    active = set(range(stage.n))
    collisions: list[PerformanceCollision] = []
    while True:
        hit = first_crossing(
            {a: casting.paths[a] for a in active}, time=stage.graph.time
        )
        if hit is None:
            break
        i, j, v = hit
        pair = _is_valid_collision(stage, casting, i, j)
        if pair is None:
            return RehearsalResult(False, crossing=hit, collisions=tuple(collisions))
        collisions.append(PerformanceCollision(v, (i, j), pair))
        active -= {i, j}
    if any(stage.pair_of(casting.pi[a]) is not None for a in active):
        return RehearsalResult(False, collisions=tuple(collisions), stalled=True)

    diagram = list(casting.paths)
    ghosts: dict[int, list] = {}
    for c in collisions:
        for a in c.actors:
            path = casting.paths[a]
            cut = path.index(c.vertex)
            diagram[a] = path[: cut + 1]
            slot = casting.pi[a] - ghost_columns(stage.s, c.pair)[0]
            ghosts.setdefault(c.pair, [None, None])[slot] = path[cut:]
    performance = Performance(
        stage,
        tuple(diagram),
        tuple(sorted(collisions, key=lambda c: c.pair)),
        tuple(tuple(ghosts[j]) for j in range(stage.k)),
    )
    return RehearsalResult(True, performance=performance, collisions=tuple(collisions))


def attribute(performance: Performance) -> Casting:
    """Glue diagram paths to ghost paths by the swap principle.

    The left-starting actor of a collision continues along the ghost that
    ends further right: with ``a_j`` not right of ``b_j`` the larger actor
    takes slot ``(j,1)``, otherwise the smaller one does.
    """
    stage = performance.stage
    n, s, k = stage.n, stage.s, stage.k
    if len(performance.diagram) != n or len(performance.ghost_paths) != k:
        raise InvalidArgument("performance does not match its stage dimensions")
    labels = sorted(c.pair for c in performance.collisions)
    if labels != list(range(k)):
        raise InvalidArgument(f"ghost pair labels must be 1..{k} once each")
    pi: list[int | None] = [None] * n
    paths: list[Path | None] = [None] * n
    for c in performance.collisions:
        i, j = c.actors
        if not i < j or pi[i] is not None or pi[j] is not None:
            raise InvalidArgument(f"malformed collision pairing {c.actors}")
        g1, g2 = performance.ghost_paths[c.pair]
        for a in (i, j):
            if performance.diagram[a][-1] != c.vertex:
                raise InvalidArgument(f"actor {a + 1} does not reach collision vertex {c.vertex!r}")
        if g1[0] != c.vertex or g2[0] != c.vertex:
            raise InvalidArgument("ghost paths must start at their collision vertex")
        col1, col2 = ghost_columns(s, c.pair)
        to_first, to_second = (j, i) if stage.signs[c.pair] == 1 else (i, j)
        pi[to_first], paths[to_first] = col1, performance.diagram[to_first] + g1[1:]
        pi[to_second], paths[to_second] = col2, performance.diagram[to_second] + g2[1:]
    slot_of = {y: l for l, y in enumerate(stage.state.survivors)}
    for a in range(n):
        if pi[a] is not None:
            continue
        end = performance.diagram[a][-1]
        if end not in slot_of:
            raise InvalidArgument(f"actor {a + 1} neither collides nor ends at a survivor position")
        pi[a], paths[a] = slot_of.pop(end), performance.diagram[a]
    return Casting(stage, tuple(pi), tuple(paths))


def segment_swap(casting: Casting, i: int, j: int, v) -> Casting:
    """Exchange the suffixes of actors ``i`` and ``j`` after shared vertex ``v``."""
    pa, pb = casting.paths[i], casting.paths[j]
    if v not in pa or v not in pb:
        raise InvalidArgument(f"vertex {v!r} is not shared by actors {i + 1} and {j + 1}")
    ca, cb = pa.index(v), pb.index(v)
    paths = list(casting.paths)
    paths[i] = pa[:ca] + pb[cb:]
    paths[j] = pb[:cb] + pa[ca:]
    pi = list(casting.pi)
    pi[i], pi[j] = pi[j], pi[i]
    return Casting(casting.stage, tuple(pi), tuple(paths))


def global_involution(casting: Casting) -> Casting:
    """Compose local involutions in crossing order.

    At each earliest active crossing the segment swap is tried; if the
    swapped casting is still a candidate it is returned, otherwise the pair
    is a fixed point of its local involution and both actors retire.
    """
    stage = casting.stage
    active = set(range(stage.n))
    while True:
        hit = first_crossing({a: casting.paths[a] for a in active}, time=stage.graph.time)
        if hit is None:
            return casting
        i, j, v = hit
        swapped = segment_swap(casting, i, j, v)
        if swapped.candidate:
            return swapped
        active -= {i, j}


@dataclass
class AuditReport:
    checked: int = 0
    fixed_points: int = 0
    paired: int = 0
    performances: int | None = None
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        out = {
            "checked": self.checked,
            "fixed_points": self.fixed_points,
            "paired": self.paired,
            "violations": self.violations,
        }
        if self.performances is not None:
            out["performances"] = self.performances
        return out


def audit_involution(
    graph: SpacetimeGraph,
    sources: Sequence,
    state: FinalState,
    key: Callable | None = None,
    cap: int = DEFAULT_CASTING_CAP,
    performances: Sequence[Performance] | None = None,
) -> AuditReport:
    """Check the involution theorem, sign identity and bijection on every candidate casting.

    ``performances`` optionally supplies an independently generated list of
    all performances for the state (see :func:`lattice_performances`).
    """
    castings = enumerate_candidate_castings(graph, sources, state, key, cap)
    report = AuditReport(checked=len(castings))
    known = set(castings)
    bad = report.violations
    stage = castings[0].stage if castings else Stage(graph, tuple(sources), state, key)
    expected_sign = (-1) ** sum(1 for e in stage.signs if e == 1)
    k = stage.k
    signed_sum = Fraction(0)
    fixed_weight = Fraction(0)
    fixed: set[Casting] = set()

    for c in castings:
        signed_sum += ghostdet.formal_sign(c.pi, stage.s, k) * c.sign * c.path_product
        image = global_involution(c)
        rehearsal = rehearse(c)
        if rehearsal.stalled:
            bad.append({"check": "crossings_exist", "pi": list(c.pi)})
        if global_involution(image) != c:
            bad.append({"check": "involution", "pi": list(c.pi)})
        if image == c:
            report.fixed_points += 1
            fixed.add(c)
            fixed_weight += c.weight
            if not rehearsal.success:
                bad.append({"check": "fixed_iff_success", "pi": list(c.pi)})
                continue
            if c.sign != expected_sign:
                bad.append({"check": "sign_identity", "pi": list(c.pi), "sign": c.sign})
            perf = rehearsal.performance
            if attribute(perf) != c:
                bad.append({"check": "attribute_after_rehearse", "pi": list(c.pi)})
            again = rehearse(attribute(perf))
            if not again.success or again.performance != perf:
                bad.append({"check": "rehearse_after_attribute", "pi": list(c.pi)})
        else:
            report.paired += 1
            if rehearsal.success:
                bad.append({"check": "fixed_iff_success", "pi": list(c.pi)})
            if image not in known or not image.candidate:
                bad.append({"check": "pair_is_candidate", "pi": list(c.pi)})
            if image.path_product != c.path_product or image.sign != -c.sign:
                bad.append({"check": "weight_and_sign", "pi": list(c.pi)})

    z = ghostdet.annihilation_weight(ghostdet.build_matrix(graph, stage.sources, state, stage.key))
    if signed_sum != factorial(k) * z:
        bad.append({"check": "cancellation_sum", "signed_sum": signed_sum, "k_factorial_z": factorial(k) * z})
    if fixed_weight != z:
        bad.append({"check": "fixed_point_weight", "fixed": fixed_weight, "z": z})

    if performances is not None:
        report.performances = len(performances)
        attributed = set()
        total = Fraction(0)
        for perf in performances:
            total += perf.weight
            cast = attribute(perf)
            attributed.add(cast)
            result = rehearse(cast)
            if not result.success or result.performance != perf:
                bad.append({"check": "rehearse_after_attribute", "performance": repr(perf.collisions)})
        if attributed != fixed or len(attributed) != len(performances):
            bad.append({"check": "performance_bijection", "attributed": len(attributed), "fixed": len(fixed)})
        if total != z:
            bad.append({"check": "performance_weight", "total": total, "z": z})
    return report


def lattice_performance_table(starts: Sequence[int], t: int, graph: SpacetimeGraph) -> dict[FinalState, list[Performance]]:
    """Every performance of every final state, read off the annihilating dynamics.

    An (evolution, ghost numbering) pair is one performance whose ghost path
    ``(j,1)`` is the lower actor's continuation and ``(j,2)`` the higher
    actor's.  The map is a bijection because the evolution is recovered from
    the ordered ghost paths.
    """
    from .dynamics import evolutions, run_annihilation

    starts = tuple(starts)
    n = len(starts)
    sources = tuple((x, 0) for x in starts)
    stages: dict[FinalState, Stage] = {}
    out: dict[FinalState, list[Performance]] = {}
    for ev in evolutions(n, t):
        outcome = run_annihilation(starts, ev)
        survivors = tuple((p, t) for _, p in outcome.survivors)
        tr = [tuple((p, time) for time, p in enumerate(traj)) for traj in outcome.trajectories]
        for order in itertools.permutations(range(outcome.k)):
            # order[j] is the physical collision numbered j
            state = FinalState(
                survivors,
                tuple(((outcome.ghost_pairs[c][0], t), (outcome.ghost_pairs[c][1], t)) for c in order),
            )
            stage = stages.get(state)
            if stage is None:
                stage = stages[state] = Stage(graph, sources, state)
            diagram = list(tr)
            collisions, ghosts = [], []
            for j, c in enumerate(order):
                col = outcome.collisions[c]
                lo, hi = col.actors
                diagram[lo] = tr[lo][: col.time + 1]
                diagram[hi] = tr[hi][: col.time + 1]
                collisions.append(PerformanceCollision((col.position, col.time), (lo, hi), j))
                ghosts.append((tr[lo][col.time :], tr[hi][col.time :]))
            out.setdefault(state, []).append(
                Performance(stage, tuple(diagram), tuple(collisions), tuple(ghosts))
            )
    return out


def lattice_performances(starts: Sequence[int], t: int, state: FinalState, graph: SpacetimeGraph) -> list[Performance]:
    if state.n != len(starts):
        raise InvalidArgument("state does not match the number of walkers")
    return lattice_performance_table(starts, t, graph).get(state, [])
