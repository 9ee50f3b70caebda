"""Brute-force oracles for +-1 walkers on the integer lattice.

Every elementary evolution assigns each walker a sequence of ``t`` steps,
each ``+1`` or ``-1`` with probability 1/2.  An annihilated walker's unused
steps drive its ghost, so the outcome space is exactly ``2**(n*t)``.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

from .errors import InvalidArgument, ResourceLimit
from .ghostdet import FinalState, state_sort_key
from .spacetime import validate_starts

DEFAULT_ENUMERATION_CAP = 24  # max n*t

Evolution = tuple  # n tuples of +-1, each of length t


def _check_evolution(starts: Sequence[int], evolution: Evolution) -> int:
    validate_starts(starts)
    if len(evolution) != len(starts):
        raise InvalidArgument(f"{len(starts)} walkers but {len(evolution)} step streams")
    lengths = {len(steps) for steps in evolution}
    if len(lengths) > 1:
        raise InvalidArgument("step streams must share one length")
    if any(step not in (1, -1) for steps in evolution for step in steps):
        raise InvalidArgument("steps must be +1 or -1")
    return lengths.pop() if lengths else 0


def _check_cap(n: int, t: int, cap: int) -> None:
    if n * t > cap:
        raise ResourceLimit(f"n*t = {n * t} exceeds the enumeration cap {cap}")


def evolutions(n: int, t: int) -> Iterable[Evolution]:
    return itertools.product(itertools.product((-1, 1), repeat=t), repeat=n)


def evolution_from_index(index: int, n: int, t: int) -> Evolution:
    """Decode an evolution from its position in :func:`evolutions` order."""
    bits = [(index >> (n * t - 1 - i)) & 1 for i in range(n * t)]
    steps = [1 if b else -1 for b in bits]
    return tuple(tuple(steps[i * t : (i + 1) * t]) for i in range(n))


def pair_up_at_site(actors: Sequence[int]) -> tuple[list[tuple[int, int]], list[int]]:
    """Consecutive-pair rule for co-located walkers.

    Sorted by index, ``(I1, I2), (I3, I4), ...`` annihilate and an odd last
    walker stays active.
    """
    ordered = sorted(actors)
    pairs = [(ordered[i], ordered[i + 1]) for i in range(0, len(ordered) - 1, 2)]
    leftover = [ordered[-1]] if len(ordered) % 2 else []
    return pairs, leftover


@dataclass(frozen=True)
class Collision:
    time: int
    position: int
    actors: tuple[int, int]


@dataclass(frozen=True)
class AnnihilationOutcome:
    """Result of one evolution.

    ``ghost_pairs[i]`` holds the final positions of the ghosts of
    ``collisions[i]``; the pair is physically unordered and is stored with
    the lower actor's ghost first.
    """

    t: int
    collisions: tuple[Collision, ...]
    survivors: tuple[tuple[int, int], ...]  # (actor, final position), by position
    ghost_pairs: tuple[tuple[int, int], ...]
    trajectories: tuple[tuple[int, ...], ...] = field(repr=False, default=())

    @property
    def k(self) -> int:
        return len(self.collisions)

    def labelled_states(self) -> list[tuple[FinalState, Fraction]]:
        """Final states reachable from this outcome by numbering and orienting its ghost pairs.

        Each numbering has probability ``1/k!``; each unordered pair with
        distinct positions is split evenly over its two orientations.
        """
        survivors = tuple((p, self.t) for _, p in self.survivors)
        out: list[tuple[FinalState, Fraction]] = []
        k = self.k
        for order in itertools.permutations(range(k)):
            pairs = [self.ghost_pairs[i] for i in order]
            choices = [[(a, b), (b, a)] if a != b else [(a, b)] for a, b in pairs]
            share = Fraction(1, factorial(k))
            for c in choices:
                share /= len(c)
            for oriented in itertools.product(*choices):
                state = FinalState(survivors, tuple(((a, self.t), (b, self.t)) for a, b in oriented))
                out.append((state, share))
        return out


def run_annihilation(starts: Sequence[int], evolution: Evolution) -> AnnihilationOutcome:
    t = _check_evolution(starts, evolution)
    n = len(starts)
    pos = list(starts)
    trajectories = [[p] for p in pos]
    active = set(range(n))
    collisions: list[Collision] = []
    for step in range(t):
        for i in range(n):
            pos[i] += evolution[i][step]
            trajectories[i].append(pos[i])
        sites: dict[int, list[int]] = defaultdict(list)
        for i in active:
            sites[pos[i]].append(i)
        for site in sorted(sites):
            if len(sites[site]) < 2:
                continue
            pairs, _ = pair_up_at_site(sites[site])
            for i, j in pairs:
                collisions.append(Collision(step + 1, site, (i, j)))
                active.discard(i)
                active.discard(j)
    survivors = tuple(sorted(((i, pos[i]) for i in active), key=lambda item: item[1]))
    ghost_pairs = tuple((pos[c.actors[0]], pos[c.actors[1]]) for c in collisions)
    return AnnihilationOutcome(
        t, tuple(collisions), survivors, ghost_pairs, tuple(tuple(tr) for tr in trajectories)
    )


@dataclass
class DistributionTable:
    """Exact probability of each final state."""

    probabilities: dict[FinalState, Fraction]

    def __getitem__(self, state: FinalState) -> Fraction:
        return self.probabilities.get(state, Fraction(0))

    def __len__(self) -> int:
        return len(self.probabilities)

    def __iter__(self):
        return iter(self.sorted_states())

    def items(self):
        return [(s, self.probabilities[s]) for s in self.sorted_states()]

    def sorted_states(self) -> list[FinalState]:
        return sorted(self.probabilities, key=state_sort_key)

    def total(self) -> Fraction:
        return sum(self.probabilities.values(), Fraction(0))

    def marginal_k(self, k: int) -> Fraction:
        return sum((p for s, p in self.probabilities.items() if s.k == k), Fraction(0))


def _count_states(starts: tuple[int, ...], t: int, lo: int, hi: int) -> dict[FinalState, Fraction]:
    n = len(starts)
    acc: dict[FinalState, Fraction] = defaultdict(Fraction)
    if lo == 0 and hi == 2 ** (n * t):
        stream: Iterable[Evolution] = evolutions(n, t)
    else:
        stream = (evolution_from_index(i, n, t) for i in range(lo, hi))
    memo: dict[tuple, list] = {}
    for ev in stream:
        outcome = run_annihilation(starts, ev)
        sig = (tuple(p for _, p in outcome.survivors), outcome.ghost_pairs)
        labelled = memo.get(sig)
        if labelled is None:
            labelled = memo[sig] = outcome.labelled_states()
        for state, share in labelled:
            acc[state] += share
    return dict(acc)


def merge_partials(partials: Iterable[dict[FinalState, Fraction]]) -> dict[FinalState, Fraction]:
    acc: dict[FinalState, Fraction] = defaultdict(Fraction)
    for part in partials:
        for state, w in part.items():
            acc[state] += w
    return dict(acc)


def annihilation_distribution(
    starts: Sequence[int], t: int, cap: int = DEFAULT_ENUMERATION_CAP, workers: int = 1
) -> DistributionTable:
    """Exact final-state distribution by enumerating all ``2**(n*t)`` evolutions."""
    starts = tuple(starts)
    validate_starts(starts)
    n = len(starts)
    _check_cap(n, t, cap)
    total = 2 ** (n * t)
    if workers <= 1:
        counts = _count_states(starts, t, 0, total)
    else:
        bounds = [total * i // workers for i in range(workers + 1)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(
                _count_states,
                [starts] * workers,
                [t] * workers,
                bounds[:-1],
                bounds[1:],
            )
            counts = merge_partials(parts)
    scale = Fraction(1, total)
    return DistributionTable({s: w * scale for s, w in counts.items() if w})


@dataclass(frozen=True)
class CoalescenceEntity:
    position: int
    multiplicity: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class MergeEvent:
    time: int
    position: int
    multiplicities: tuple[int, int]
    heir_multiplicity: int


@dataclass(frozen=True)
class CoalescenceTrace:
    n: int
    entities: tuple[CoalescenceEntity, ...]
    merges: tuple[MergeEvent, ...]


def run_coalescence(
    starts: Sequence[int], evolution: Evolution, heir: str = "lowest"
) -> CoalescenceTrace:
    """Coalescing dynamics.  The heir follows the lowest (or, for the
    convention spot check, highest) constituent's step stream."""
    if heir not in ("lowest", "highest"):
        raise InvalidArgument(f"unknown heir convention {heir!r}")
    t = _check_evolution(starts, evolution)
    n = len(starts)
    # entity: [stream owner, position, multiplicity, members]
    entities = [[i, starts[i], 1, (i,)] for i in range(n)]
    merges: list[MergeEvent] = []
    for step in range(t):
        for e in entities:
            e[1] += evolution[e[0]][step]
        sites: dict[int, list[list]] = defaultdict(list)
        for e in entities:
            sites[e[1]].append(e)
        survivors = []
        for site in sorted(sites):
            group = sorted(sites[site], key=lambda e: min(e[3]))
            while len(group) > 1:
                merged = []
                for i in range(0, len(group) - 1, 2):
                    left, right = group[i], group[i + 1]
                    owner = (min if heir == "lowest" else max)(left[0], right[0])
                    new = [owner, site, left[2] + right[2], tuple(sorted(left[3] + right[3]))]
                    merges.append(MergeEvent(step + 1, site, (left[2], right[2]), new[2]))
                    merged.append(new)
                if len(group) % 2:
                    merged.append(group[-1])
                group = merged
            survivors.extend(group)
        entities = survivors
    final = tuple(
        CoalescenceEntity(e[1], e[2], e[3]) for e in sorted(entities, key=lambda e: e[1])
    )
    return CoalescenceTrace(n, final, tuple(merges))


@dataclass(frozen=True)
class Reclassification:
    events: tuple[tuple[MergeEvent, str], ...]
    annihilations: int
    complete: bool


def classify_merge(m1: int, m2: int) -> str:
    return "annihilation" if m1 % 2 == 1 and m2 % 2 == 1 else "non-event"


def parity_reclassify(trace: CoalescenceTrace) -> Reclassification:
    """Read a coalescence trace as annihilation: even multiplicity means ghost."""
    events = tuple((m, classify_merge(*m.multiplicities)) for m in trace.merges)
    annihilations = sum(1 for _, label in events if label == "annihilation")
    complete = trace.n - 2 * annihilations == 0
    even_heirs = all(e.multiplicity % 2 == 0 for e in trace.entities)
    assert complete == even_heirs, "reclassification disagrees with the multiplicity predicate"
    return Reclassification(events, annihilations, complete)


def pairwise_coalescence_probability(
    starts: Sequence[int], t: int, cap: int = DEFAULT_ENUMERATION_CAP, heir: str = "lowest"
) -> Fraction:
    """Probability that every final heir has even multiplicity."""
    validate_starts(starts)
    n = len(starts)
    if n % 2:
        raise InvalidArgument("pairwise coalescence needs an even number of walkers")
    _check_cap(n, t, cap)
    hits = sum(
        1
        for ev in evolutions(n, t)
        if all(e.multiplicity % 2 == 0 for e in run_coalescence(starts, ev, heir).entities)
    )
    return Fraction(hits, 2 ** (n * t))


def check_prescribed_layout(n: int, m: int, a: int, survivors: Sequence[int], b: int) -> None:
    if not 1 <= m < n:
        raise InvalidArgument(f"pair index m={m} must satisfy 1 <= m < n={n}")
    if len(survivors) != n - 2:
        raise InvalidArgument(f"expected {n - 2} survivor targets, got {len(survivors)}")
    if not a < b:
        raise InvalidArgument(f"ghost positions must satisfy a < b, got ({a}, {b})")
    if any(q <= p for p, q in zip(survivors, survivors[1:])):
        raise InvalidArgument("survivor targets must be strictly increasing")
    if survivors and not a < survivors[0] < b:
        raise InvalidArgument(f"need a < y_1 < b, got a={a}, y_1={survivors[0]}, b={b}")


def _prescribed_key(outcome: AnnihilationOutcome, m: int):
    """``(a, survivors, b)`` if only walkers ``m, m+1`` (1-based) ever collide."""
    if outcome.k != 1 or outcome.collisions[0].actors != (m - 1, m):
        return None
    a, b = sorted(outcome.ghost_pairs[0])
    return (a, tuple(p for _, p in outcome.survivors), b)


def prescribed_table(
    starts: Sequence[int], m: int, t: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> dict[tuple, Fraction]:
    """Prescribed annihilation weight of every ``(a, survivors, b)`` with nonzero weight."""
    validate_starts(starts)
    n = len(starts)
    if not 1 <= m < n:
        raise InvalidArgument(f"pair index m={m} must satisfy 1 <= m < n={n}")
    _check_cap(n, t, cap)
    counts: dict[tuple, int] = defaultdict(int)
    for ev in evolutions(n, t):
        key = _prescribed_key(run_annihilation(starts, ev), m)
        if key is not None:
            counts[key] += 1
    return {key: Fraction(c, 2 ** (n * t)) for key, c in counts.items()}


def prescribed_annihilation_weight(
    starts: Sequence[int],
    m: int,
    a: int,
    survivors: Sequence[int],
    b: int,
    t: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Fraction:
    """Weight of evolutions where walkers ``m`` and ``m+1`` (1-based) annihilate
    each other, their ghosts end at ``{a, b}``, and nobody else ever collides
    while the rest end at ``survivors``."""
    validate_starts(starts)
    n = len(starts)
    check_prescribed_layout(n, m, a, tuple(survivors), b)
    _check_cap(n, t, cap)
    target = (a, tuple(survivors), b)
    hits = sum(1 for ev in evolutions(n, t) if _prescribed_key(run_annihilation(starts, ev), m) == target)
    return Fraction(hits, 2 ** (n * t))
