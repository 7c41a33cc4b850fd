"""Exact linear algebra over the rationals.

Matrices are plain lists of rows holding :class:`fractions.Fraction` (or
ints, which are promoted).  Everything here is deterministic: pivots are
chosen as the first nonzero entry scanning columns left to right, so the
smaller variable index is always eliminated first.
"""
from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence, Tuple

Matrix = List[List[Fraction]]


def as_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form.

    Returns the nonzero rows of the reduced matrix and the list of pivot
    columns (one per returned row).
    """
    m = as_matrix(rows)
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        row = m[r]
        inv = 1 / row[c]
        if inv != 1:
            for j in range(c, ncols):
                if row[j]:
                    row[j] *= inv
        for i in range(len(m)):
            if i != r:
                f = m[i][c]
                if f:
                    other = m[i]
                    for j in range(c, ncols):
                        if row[j]:
                            other[j] -= f * row[j]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis of ``{v : A v = 0}``, one vector per free column, in column order."""
    reduced, pivots = rref(rows, ncols)
    pivot_set = set(pivots)
    basis: Matrix = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[free]
        basis.append(v)
    return basis


def solve_affine(rows: Sequence[Sequence], rhs: Sequence, ncols: int):
    """Particular solution and nullspace basis of ``A v = b``.

    Returns ``(v0, basis)`` or ``(None, [])`` when the system is inconsistent.
    The particular solution sets every free variable to zero.
    """
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    reduced, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None, []
    v0 = [Fraction(0)] * ncols
    for row, p in zip(reduced, pivots):
        v0[p] = row[ncols]
    pivot_set = set(pivots)
    basis: Matrix = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[free]
        basis.append(v)
    return v0, basis


def solve_square(rows: Sequence[Sequence], rhs: Sequence) -> List[Fraction]:
    n = len(rows)
    v0, basis = solve_affine(rows, rhs, n)
    if v0 is None or basis:
        raise ValueError("singular system")
    return v0
