"""Named extremal boxes: PR box, Barrett k-outcome boxes, and the binary
output family parameterized by nondeterministic input counts and signs.

The binary family ("catalog boxes") is laid out as follows.  Alice's
inputs ``x < gx`` and Bob's ``y < gy`` are nondeterministic with uniform
marginals; the remaining inputs always output 0.  Inside the
nondeterministic block row ``y = 0`` and column ``x = 0`` are perfectly
correlated, cell ``(1, 1)`` is anticorrelated, and every other cell is
free: it is anticorrelated iff it belongs to the set ``anticorrelated``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Tuple

from .core import (
    DEFAULT_ORBIT_BUDGET,
    CorrelationTable,
    LocalRelabeling,
    Scenario,
    apply_relabeling,
    canonical_form,
    is_nonsignaling,
    marginals,
    validate,
)
from .errors import NsboxError, SpecError

HALF = Fraction(1, 2)


def free_cells(gx: int, gy: int) -> List[Tuple[int, int]]:
    """Cells whose sign is a free parameter, in ``(x, y)`` order."""
    return [
        (x, y)
        for x in range(1, gx)
        for y in range(1, gy)
        if (x, y) != (1, 1)
    ]


@dataclass(frozen=True)
class ExtremalSpec:
    dx: int
    dy: int
    gx: int = 0
    gy: int = 0
    anticorrelated: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(
            self, "anticorrelated", frozenset(tuple(int(v) for v in c) for c in self.anticorrelated)
        )
        if self.dx < 1 or self.dy < 1:
            raise SpecError("input alphabet sizes must be positive")
        local = self.gx == 0 and self.gy == 0
        nonlocal_ = 2 <= self.gx <= self.dx and 2 <= self.gy <= self.dy
        if not (local or nonlocal_):
            raise SpecError(
                f"need gx = gy = 0, or 2 <= gx <= dx and 2 <= gy <= dy; got gx={self.gx}, gy={self.gy}"
            )
        allowed = set(free_cells(self.gx, self.gy))
        bad = sorted(self.anticorrelated - allowed)
        if bad:
            raise SpecError(f"cells {bad} are not free sign cells for gx={self.gx}, gy={self.gy}")

    @property
    def is_local(self) -> bool:
        return self.gx == 0

    @property
    def scenario(self) -> Scenario:
        return Scenario(self.dx, self.dy, 2, 2)

    def signs(self) -> dict:
        """Free cell -> ``"anticorrelated"`` / ``"correlated"``."""
        return {
            c: ("anticorrelated" if c in self.anticorrelated else "correlated")
            for c in free_cells(self.gx, self.gy)
        }

    def parity(self, x: int, y: int) -> int:
        """a XOR b in a nondeterministic cell: 0 correlated, 1 anticorrelated."""
        if not (x < self.gx and y < self.gy):
            raise ValueError(f"cell ({x},{y}) is not in the nondeterministic block")
        return int((x, y) == (1, 1) or (x, y) in self.anticorrelated)

    def to_dict(self) -> dict:
        return {
            "dx": self.dx,
            "dy": self.dy,
            "gx": self.gx,
            "gy": self.gy,
            "anticorrelated_cells": [list(c) for c in sorted(self.anticorrelated)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExtremalSpec":
        try:
            return cls(
                int(d["dx"]),
                int(d["dy"]),
                int(d.get("gx", 0)),
                int(d.get("gy", 0)),
                frozenset(tuple(c) for c in d.get("anticorrelated_cells", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed extremal spec: {exc}") from exc


PR_SPEC = ExtremalSpec(2, 2, 2, 2)


@dataclass(frozen=True)
class BarrettSpec:
    k: int

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 2:
            raise SpecError(f"Barrett box needs k >= 2, got {self.k!r}")


def pr_box() -> CorrelationTable:
    """1/2 when a XOR b = x*y, else 0."""
    return CorrelationTable.from_function(
        Scenario(2, 2, 2, 2),
        lambda x, y, a, b: HALF if (a ^ b) == x * y else Fraction(0),
    )


def barrett_box(spec) -> CorrelationTable:
    """1/k when (b - a) mod k = x*y, on inputs {0,1} and outputs {0..k-1}."""
    if not isinstance(spec, BarrettSpec):
        spec = BarrettSpec(spec)
    k = spec.k
    w = Fraction(1, k)
    return CorrelationTable.from_function(
        Scenario(2, 2, k, k),
        lambda x, y, a, b: w if (b - a) % k == x * y else Fraction(0),
    )


def table2_box(spec: ExtremalSpec) -> CorrelationTable:
    def entry(x, y, a, b):
        xn, yn = x < spec.gx, y < spec.gy
        if xn and yn:
            return HALF if (a ^ b) == spec.parity(x, y) else Fraction(0)
        if xn:
            return HALF if b == 0 else Fraction(0)
        if yn:
            return HALF if a == 0 else Fraction(0)
        return Fraction(int(a == 0 and b == 0))

    return CorrelationTable.from_function(spec.scenario, entry)


def from_xor_characterization(dx: int, dy: int, Q: Iterable[Tuple[int, int]]) -> CorrelationTable:
    """Box with a_x + b_y = [x=1][y=1] + sum_{(i,j) in Q} [x=i][y=j] (mod 2)."""
    Q = frozenset(tuple(c) for c in Q)
    if (1, 1) in Q:
        raise SpecError("(1,1) is always anticorrelated and may not appear in Q")
    for i, j in Q:
        if not (1 <= i < dx and 1 <= j < dy):
            raise SpecError(f"cell ({i},{j}) out of range for dx={dx}, dy={dy}")
    if dx < 2 or dy < 2:
        raise SpecError("the xor characterization needs dx, dy >= 2")

    def entry(x, y, a, b):
        rhs = (int(x == 1 and y == 1) + int((x, y) in Q)) % 2
        return HALF if (a ^ b) == rhs else Fraction(0)

    return CorrelationTable.from_function(Scenario(dx, dy, 2, 2), entry)


def spec_from_xor(dx: int, dy: int, Q: Iterable[Tuple[int, int]]) -> ExtremalSpec:
    return ExtremalSpec(dx, dy, dx, dy, frozenset(tuple(c) for c in Q))


def enumerate_specs(dx: int, dy: int) -> List[ExtremalSpec]:
    """Every spec for the given input sizes: the local one first, then by (gx, gy, Q)."""
    out = [ExtremalSpec(dx, dy)]
    for gx in range(2, dx + 1):
        for gy in range(2, dy + 1):
            cells = free_cells(gx, gy)
            for bits in range(2 ** len(cells)):
                Q = frozenset(c for i, c in enumerate(cells) if bits >> i & 1)
                out.append(ExtremalSpec(dx, dy, gx, gy, Q))
    return out


def enumerate_classes(dx: int, dy: int, budget: int = DEFAULT_ORBIT_BUDGET) -> List[ExtremalSpec]:
    """One spec per relabeling class, the first generated spec of each."""
    seen = set()
    out = []
    for spec in enumerate_specs(dx, dy):
        canon, _ = canonical_form(table2_box(spec), budget)
        if canon not in seen:
            seen.add(canon)
            out.append(spec)
    return out


class NotCatalogBox(NsboxError):
    """The table is not a relabeled member of the binary extremal family."""


def identify_spec(table: CorrelationTable) -> Tuple[ExtremalSpec, LocalRelabeling]:
    """Find ``(spec, r)`` with ``apply_relabeling(table2_box(spec), r) == table``.

    Works constructively from the marginals and cell parities, so it scales
    to input sizes where an orbit search would not.
    """
    s = table.scenario
    if not s.binary:
        raise NotCatalogBox("binary outputs required")
    if not (validate(table).ok and is_nonsignaling(table).ok):
        raise NotCatalogBox("not a valid no-signalling table")
    mg = marginals(table)
    l, m = mg.l, mg.m
    if any(v not in (0, HALF, 1) for v in l + m):
        raise NotCatalogBox("marginals must lie in {0, 1/2, 1}")
    xn = [x for x in range(s.dx) if l[x] == HALF]
    yn = [y for y in range(s.dy) if m[y] == HALF]
    xd = [x for x in range(s.dx) if l[x] != HALF]
    yd = [y for y in range(s.dy) if m[y] != HALF]
    # deterministic inputs output 1 with certainty when the marginal is 0
    flip_a = {x: int(l[x] == 0) for x in xd}
    flip_b = {y: int(m[y] == 0) for y in yd}

    if not xn and not yn:
        spec = ExtremalSpec(s.dx, s.dy)
        return spec, _relabeling_to(table, spec, list(range(s.dx)), list(range(s.dy)), flip_a, flip_b)
    if len(xn) < 2 or len(yn) < 2:
        raise NotCatalogBox("uniform inputs on one side only: not extremal")

    F = {}
    for x in xn:
        for y in yn:
            c = table.cell(x, y)
            if c[0, 0] == HALF and c[1, 1] == HALF:
                F[x, y] = 0
            elif c[0, 1] == HALF and c[1, 0] == HALF:
                F[x, y] = 1
            else:
                raise NotCatalogBox(f"cell ({x},{y}) is neither correlated nor anticorrelated")
    pick = None
    for x0, x1 in itertools.combinations(xn, 2):
        for y0, y1 in itertools.combinations(yn, 2):
            if (F[x0, y0] + F[x0, y1] + F[x1, y0] + F[x1, y1]) % 2:
                pick = (x0, x1, y0, y1)
                break
        if pick:
            break
    if pick is None:
        raise NotCatalogBox("parity pattern is local: not extremal")
    x0, x1, y0, y1 = pick
    order_x = [x0, x1] + [x for x in xn if x not in (x0, x1)] + xd
    order_y = [y0, y1] + [y for y in yn if y not in (y0, y1)] + yd
    for y in yn:
        flip_b[y] = F[x0, y]
    for x in xn:
        flip_a[x] = (F[x, y0] + F[x0, y0]) % 2
    gx, gy = len(xn), len(yn)
    Q = set()
    for i, x in enumerate(order_x[:gx]):
        for j, y in enumerate(order_y[:gy]):
            if (i, j) in set(free_cells(gx, gy)) and (F[x, y] + flip_a[x] + flip_b[y]) % 2:
                Q.add((i, j))
    spec = ExtremalSpec(s.dx, s.dy, gx, gy, frozenset(Q))
    return spec, _relabeling_to(table, spec, order_x, order_y, flip_a, flip_b)


def _relabeling_to(table, spec, order_x, order_y, flip_a, flip_b):
    s = table.scenario
    pa = [0] * s.dx
    for new, old in enumerate(order_x):
        pa[old] = new
    pb = [0] * s.dy
    for new, old in enumerate(order_y):
        pb[old] = new
    to_std = LocalRelabeling(
        pa,
        pb,
        [(1, 0) if flip_a[x] else (0, 1) for x in range(s.dx)],
        [(1, 0) if flip_b[y] else (0, 1) for y in range(s.dy)],
    )
    if apply_relabeling(table, to_std) != table2_box(spec):
        raise NotCatalogBox("table does not match any catalog box")
    return to_std.inverse()


TABLE_III_ROWS = [
    # y = 0, rows b = 0, 1, 2; each row lists x = 0, 1, 2 with a = 0, 1, 2
    ["1/4 0 1/4", "1/2 0 0", "1/2 0 0"],
    ["0 1/4 0", "0 1/4 0", "0 1/4 0"],
    ["1/4 0 0", "0 0 1/4", "0 0 1/4"],
    # y = 1
    ["1/2 0 0", "1/4 1/4 0", "1/4 0 1/4"],
    ["0 1/4 0", "1/4 0 0", "1/4 0 0"],
    ["0 0 1/4", "0 0 1/4", "0 1/4 0"],
    # y = 2
    ["1/2 0 0", "1/4 1/4 0", "0 1/4 1/4"],
    ["0 1/4 0", "1/4 0 0", "1/4 0 0"],
    ["0 0 1/4", "0 0 1/4", "1/4 0 0"],
]


def table_iii() -> CorrelationTable:
    """Extremal point with three inputs and three outputs per party and biased marginals."""
    s = Scenario(3, 3, 3, 3)
    p = [[[[None] * 3 for _ in range(3)] for _ in range(3)] for _ in range(3)]
    for line, parts in enumerate(TABLE_III_ROWS):
        y, b = divmod(line, 3)
        for x, part in enumerate(parts):
            for a, v in enumerate(part.split()):
                p[x][y][a][b] = Fraction(v)
    return CorrelationTable(s, p)
