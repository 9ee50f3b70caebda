"""Is prescribed annihilation a fixed rational combination of Karlin-McGregor products?

Each final-position tuple ``z = (a, y_1, ..., y_{n-2}, b)`` gives one linear
equation in the ``n!`` unknown coefficients ``c_pi``:
``sum_pi c_pi prod_i W(x_i -> z_pi(i)) = prescribed weight of z``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .dynamics import DEFAULT_ENUMERATION_CAP, check_prescribed_layout, prescribed_table
from .errors import InvalidArgument
from .linalg import SolveResult, solve, verify_certificate, verify_solution
from .serialize import fmt
from .spacetime import lattice_instance, validate_starts

APPENDIX_STARTS = (0, 2, 4)
APPENDIX_PAIR = 1
APPENDIX_T = 4
APPENDIX_TUPLES = ((-2, 0, 2), (-2, 0, 4), (-2, 2, 4), (0, 2, 4))


@dataclass(frozen=True)
class LinearSystem:
    starts: tuple[int, ...]
    pair: int
    t: int
    tuples: tuple[tuple[int, ...], ...]
    permutations: tuple[tuple[int, ...], ...]
    matrix: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.matrix), len(self.permutations)

    def subsystem(self, rows: Sequence[int]) -> "LinearSystem":
        return LinearSystem(
            self.starts,
            self.pair,
            self.t,
            tuple(self.tuples[r] for r in rows),
            self.permutations,
            tuple(self.matrix[r] for r in rows),
            tuple(self.rhs[r] for r in rows),
        )

    def stack(self, other: "LinearSystem") -> "LinearSystem":
        if other.permutations != self.permutations:
            raise InvalidArgument("can only stack systems over the same unknowns")
        return LinearSystem(
            self.starts,
            self.pair,
            self.t,
            self.tuples + other.tuples,
            self.permutations,
            self.matrix + other.matrix,
            self.rhs + other.rhs,
        )


def canonical_tuples(starts: Sequence[int], m: int, t: int, cap: int = DEFAULT_ENUMERATION_CAP) -> list[tuple]:
    """Tuples ``(a, y_1, ..., b)`` with ``a < y_1 < b`` and nonzero prescribed weight."""
    table = prescribed_table(starts, m, t, cap)
    out = [(a, *ys, b) for a, ys, b in table if a < b and (not ys or a < ys[0] < b)]
    return sorted(out)


def build_system(
    starts: Sequence[int],
    m: int,
    t: int,
    tuples: Sequence[Sequence[int]],
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> LinearSystem:
    starts = tuple(starts)
    validate_starts(starts)
    n = len(starts)
    tuples = tuple(tuple(z) for z in tuples)
    for z in tuples:
        if len(z) != n:
            raise InvalidArgument(f"tuple {z} must list {n} positions (a, y_1, ..., b)")
        check_prescribed_layout(n, m, z[0], z[1:-1], z[-1])
    inst = lattice_instance(starts, t)
    graph = inst.graph
    weights = [graph.weights_from(x) for x in inst.sources]
    perms = tuple(itertools.permutations(range(n)))
    table = prescribed_table(starts, m, t, cap) if tuples else {}
    rows, rhs = [], []
    for z in tuples:
        verts = [(p, t) for p in z]
        row = []
        for perm in perms:
            prod = Fraction(1)
            for i, target in enumerate(perm):
                prod *= weights[i].get(verts[target], Fraction(0))
            row.append(prod)
        rows.append(tuple(row))
        rhs.append(table.get((z[0], tuple(z[1:-1]), z[-1]), Fraction(0)))
    return LinearSystem(starts, m, t, tuples, perms, tuple(rows), tuple(rhs))


def solve_exact(system: LinearSystem) -> SolveResult:
    """Exact elimination; the returned solution or certificate is re-verified."""
    ncols = len(system.permutations)
    result = solve(system.matrix, system.rhs, ncols)
    if result.consistent:
        assert verify_solution(system.matrix, system.rhs, result.solution)
    else:
        assert verify_certificate(system.matrix, system.rhs, result.certificate, ncols)
    return result


def _result_json(result: SolveResult) -> dict:
    out = {"consistent": result.consistent, "rank": result.rank}
    if result.consistent:
        out["solution"] = [fmt(x) for x in result.solution]
        out["nullity"] = result.nullity
    else:
        out["certificate"] = [fmt(x) for x in result.certificate]
        out["residual"] = fmt(result.residual)
    return out


def pooled_system(starts: Sequence[int], m: int, horizons: Sequence[int], cap: int = DEFAULT_ENUMERATION_CAP) -> LinearSystem:
    """All canonical tuples from several horizons stacked over the same unknowns."""
    system = None
    for t in horizons:
        part = build_system(starts, m, t, canonical_tuples(starts, m, t, cap), cap)
        system = part if system is None else system.stack(part)
    return system


def reproduce_appendix(tuples: Sequence[Sequence[int]] | None = None, pooled_horizons: Sequence[int] = (1, 2, 3, 4, 5)) -> dict:
    """Run the n=3, t=4 experiment and report consistency of the system and its subsystems."""
    tuples = tuple(tuple(z) for z in (tuples if tuples is not None else APPENDIX_TUPLES))
    generated = canonical_tuples(APPENDIX_STARTS, APPENDIX_PAIR, APPENDIX_T)
    system = build_system(APPENDIX_STARTS, APPENDIX_PAIR, APPENDIX_T, tuples)
    full = solve_exact(system)
    subsets = []
    for rows in itertools.combinations(range(len(tuples)), len(tuples) - 1) if len(tuples) > 1 else []:
        sub = solve_exact(system.subsystem(rows))
        subsets.append({"tuples": [list(tuples[r]) for r in rows], "consistent": sub.consistent})
    minimal = (not full.consistent) and all(s["consistent"] for s in subsets)
    report = {
        "system": {"rows": system.shape[0], "columns": system.shape[1]},
        "tuples": [list(z) for z in tuples],
        "rhs": [fmt(x) for x in system.rhs],
        "generated_tuples": [list(z) for z in generated],
        "result": _result_json(full),
        "subset_results": subsets,
        "inconsistent": not full.consistent,
        "minimal": minimal,
    }
    if pooled_horizons:
        pooled = pooled_system(APPENDIX_STARTS, APPENDIX_PAIR, pooled_horizons)
        pooled_result = solve_exact(pooled)
        report["pooled_horizons"] = {
            "horizons": list(pooled_horizons),
            "rows": pooled.shape[0],
            "result": _result_json(pooled_result),
        }
    return report
