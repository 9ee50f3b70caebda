"""Exact linear algebra over the rationals."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def permutation_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation of ``range(len(perm))`` via cycle decomposition."""
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def determinant(rows: Sequence[Sequence]) -> Fraction:
    """Gaussian elimination with exact pivots.  The empty matrix has det 1."""
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("determinant needs a square matrix")
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


@dataclass
class SolveResult:
    """Outcome of :func:`solve`.

    A consistent result carries one particular solution and the nullspace
    dimension.  An inconsistent one carries multipliers ``lam`` with
    ``lam^T A = 0`` and ``lam^T b != 0``.
    """

    consistent: bool
    rank: int
    solution: list[Fraction] | None = None
    nullity: int | None = None
    certificate: list[Fraction] | None = None
    residual: Fraction | None = None
    pivots: list[int] = field(default_factory=list)


def solve(matrix: Sequence[Sequence], rhs: Sequence, ncols: int | None = None) -> SolveResult:
    """Row-reduce ``[A | b | I]`` and read off a solution or a certificate."""
    m = len(matrix)
    n = ncols if ncols is not None else (len(matrix[0]) if m else 0)
    # each row: A part, rhs, then the running row-combination of the originals
    rows = [
        [Fraction(x) for x in matrix[i]]
        + [Fraction(rhs[i])]
        + [Fraction(int(i == r)) for r in range(m)]
        for i in range(m)
    ]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        p = rows[r][c]
        rows[r] = [x / p for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    rank = r
    for i in range(rank, m):
        if rows[i][n] != 0:
            return SolveResult(
                consistent=False,
                rank=rank,
                certificate=rows[i][n + 1 :],
                residual=rows[i][n],
                pivots=pivots,
            )
    solution = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        solution[c] = rows[i][n]
    return SolveResult(True, rank, solution=solution, nullity=n - rank, pivots=pivots)


def verify_solution(matrix, rhs, solution) -> bool:
    return all(
        sum((Fraction(a) * x for a, x in zip(row, solution)), Fraction(0)) == Fraction(b)
        for row, b in zip(matrix, rhs)
    )


def verify_certificate(matrix, rhs, lam, ncols: int | None = None) -> bool:
    n = ncols if ncols is not None else (len(matrix[0]) if matrix else 0)
    combo = [sum((l * Fraction(row[c]) for l, row in zip(lam, matrix)), Fraction(0)) for c in range(n)]
    value = sum((l * Fraction(b) for l, b in zip(lam, rhs)), Fraction(0))
    return all(x == 0 for x in combo) and value != 0
