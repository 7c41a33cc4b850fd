"""Exact phase-I simplex for feasibility of ``A w = b, w >= 0``.

Dense tableau over Fractions with Bland's rule, so it terminates on the
heavily degenerate systems that correlation polytopes produce.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence


@dataclass
class FeasibilityResult:
    feasible: bool
    x: Optional[List[Fraction]] = None
    # Farkas certificate: y.A <= 0 componentwise and y.b > 0
    farkas: Optional[List[Fraction]] = None
    pivots: int = 0


def feasible_point(A: Sequence[Sequence], b: Sequence, max_pivots: int = 100_000) -> FeasibilityResult:
    m = len(A)
    n = len(A[0]) if m else 0
    rows = []
    sign = []
    for i in range(m):
        s = -1 if b[i] < 0 else 1
        sign.append(s)
        row = [Fraction(s * v) for v in A[i]]
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        rows.append(row + art + [Fraction(s * b[i])])
    width = n + m
    basis = [n + i for i in range(m)]
    # reduced costs for min sum(artificials): c_j - c_B B^-1 A_j
    cost = [Fraction(0)] * (width + 1)
    for j in range(n):
        cost[j] = -sum((r[j] for r in rows), Fraction(0))
    cost[width] = -sum((r[width] for r in rows), Fraction(0))

    pivots = 0
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        leave = None
        for i, r in enumerate(rows):
            if r[enter] > 0:
                ratio = r[width] / r[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # cannot happen: phase-I objective is bounded below
            raise RuntimeError("unbounded phase-I problem")
        prow = rows[leave]
        pv = prow[enter]
        if pv != 1:
            prow[:] = [v / pv for v in prow]
        for i, r in enumerate(rows):
            if i != leave and r[enter] != 0:
                f = r[enter]
                rows[i] = [rv - f * pv_ for rv, pv_ in zip(r, prow)]
        f = cost[enter]
        cost = [cv - f * pv_ for cv, pv_ in zip(cost, prow)]
        basis[leave] = enter
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("pivot limit reached")

    objective = -cost[width]
    if objective == 0:
        x = [Fraction(0)] * n
        for i, j in enumerate(basis):
            if j < n:
                x[j] = rows[i][width]
        return FeasibilityResult(True, x=x, pivots=pivots)
    # dual of the final basis: y_i = 1 - reduced cost of artificial i
    y = [(1 - cost[n + i]) * sign[i] for i in range(m)]
    return FeasibilityResult(False, farkas=y, pivots=pivots)
