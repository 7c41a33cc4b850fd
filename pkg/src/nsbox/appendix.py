"""Constructive decomposition of binary-output boxes into catalog extremals.

Two stages:

1. **Cell zeroing.**  With the marginals ``l_x = P(a=0|x)`` and
   ``m_y = P(b=0|y)`` fixed, a cell has one free parameter
   ``c = P(0,0|x,y)`` in ``[max(0, l+m-1), min(l, m)]``.  Splitting at the two
   endpoints gives two tables with the same marginals and one more zero.
   Doing this cell by cell leaves tables with a zero in every cell.

2. **Marginal chaining.**  Once every cell has a zero, the table is a
   function of its marginals alone.  Moving one free marginal (together with
   everything already tied to it) is affine until some entry hits zero; the
   two endpoints tie the marginal to a constant (0, 1, 1/2) or to another
   marginal ``m_j``, ``1 - m_j``, ``l_j``, ``1 - l_j``.  Once every marginal
   is tied to a constant the table is a vertex.

Ties between marginals are kept in a small union-find with a complement bit
(``u`` versus ``1 - u``).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

from .catalog import ExtremalSpec, identify_spec
from .core import (
    CorrelationTable,
    LocalRelabeling,
    Scenario,
    is_nonsignaling,
    marginals,
    mix,
    validate,
)
from .errors import BudgetExceeded, NsboxError, SignalingError
from .polytope import ConvexDecomposition

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

# entry order inside a cell: P00, P10, P01, P11, i.e. (a, b) = (0,0),(1,0),(0,1),(1,1)
ENTRY_NAMES = ("P00", "P10", "P01", "P11")
DEFAULT_LEAF_BUDGET = 200_000


def _cell_entries(l, m, c):
    return (c, m - c, l - c, 1 + c - m - l)


def _c_for_zero(k, l, m):
    return (ZERO, m, l, l + m - 1)[k]


def _check_binary(table: CorrelationTable):
    if not table.scenario.binary:
        raise NsboxError("the appendix procedure needs binary outputs")
    if not validate(table).ok:
        raise NsboxError("table violates positivity or normalization")
    rep = is_nonsignaling(table)
    if not rep.ok:
        raise SignalingError(f"table is signaling: {rep.violations[0]}")


@dataclass(frozen=True)
class SplitStep:
    """``weight * branch_low + (1 - weight) * branch_high`` equals the parent table.

    ``branch_low`` is the first branch of the procedure (k = 1): for a cell
    split it is the endpoint ``c = min(l, m)``, for a marginal split the
    endpoint where the marginal sits on its lower bound.
    """

    weight: Fraction
    branch_low: CorrelationTable
    branch_high: CorrelationTable
    description: str


# ---------------------------------------------------------------------------
# cell zeroing


def _set_cell(table: CorrelationTable, x: int, y: int, entries) -> CorrelationTable:
    p = table.entries.copy()
    p.flags.writeable = True
    for idx, v in enumerate(entries):
        a, b = idx % 2, idx // 2
        p[x, y, a, b] = v
    return CorrelationTable(table.scenario, p)


def _cell_tuple(table, x, y):
    c = table.cell(x, y)
    return (c[0, 0], c[1, 0], c[0, 1], c[1, 1])


def _cell_split(cell, l, m):
    """(weight, first_cell, second_cell, c_lo, c_hi) for one cell."""
    c = cell[0]
    lo = max(ZERO, l + m - 1)
    hi = min(l, m)
    if lo == hi or ZERO in cell:
        return ONE, cell, cell, lo, hi
    w = (c - lo) / (hi - lo)
    return w, _cell_entries(l, m, hi), _cell_entries(l, m, lo), lo, hi


def zero_cell_split(table: CorrelationTable, cell: Tuple[int, int]) -> SplitStep:
    """Split cell ``(x, y)`` at the endpoints ``c = min(l, m)`` and ``c = max(0, l+m-1)``.

    ``branch_low`` carries the endpoint ``c = min(l, m)`` and has weight
    ``(c - c_lo) / (c_hi - c_lo)``; all other cells are untouched.  A cell
    that already holds a zero is returned unchanged in both branches with
    weight 1.
    """
    _check_binary(table)
    x, y = cell
    mg = marginals(table)
    l, m = mg.l[x], mg.m[y]
    w, first, second, lo, hi = _cell_split(_cell_tuple(table, x, y), l, m)
    desc = f"cell ({x},{y}): c={table[x, y, 0, 0]} in [{lo},{hi}], weight {w}"
    return SplitStep(w, _set_cell(table, x, y, first), _set_cell(table, x, y, second), desc)


@dataclass
class SplitNode:
    """Node of a split tree; leaves have ``children == []``."""

    table: CorrelationTable
    weight: Fraction  # weight relative to the root
    step: Optional[SplitStep] = None
    children: List["SplitNode"] = field(default_factory=list)

    def leaves(self) -> List["SplitNode"]:
        if not self.children:
            return [self]
        out = []
        for ch in self.children:
            out.extend(ch.leaves())
        return out


def one_zero_normalize(table: CorrelationTable, budget: int = DEFAULT_LEAF_BUDGET) -> SplitNode:
    """Tree of cell splits whose leaves have a zero in every cell.

    Cells are visited with ``x`` outer and ``y`` inner starting at (0, 0).
    Cells that already contain a zero are not split, and zero-weight
    branches are dropped.  Every leaf keeps the input marginals.
    """
    _check_binary(table)
    mg = marginals(table)
    s = table.scenario
    cells = list(s.cells())
    root = SplitNode(table, ONE)
    stack = [(root, 0)]
    n_leaves = 1
    while stack:
        node, i = stack.pop()
        t = node.table
        while i < len(cells):
            x, y = cells[i]
            if ZERO not in _cell_tuple(t, x, y):
                break
            i += 1
        if i == len(cells):
            continue
        x, y = cells[i]
        step = zero_cell_split(t, (x, y))
        node.step = step
        for w, child in ((step.weight, step.branch_low), (1 - step.weight, step.branch_high)):
            if w:
                ch = SplitNode(child, node.weight * w)
                node.children.append(ch)
                stack.append((ch, i + 1))
        n_leaves += len(node.children) - 1
        if n_leaves > budget:
            raise BudgetExceeded(f"cell-zeroing tree exceeds {budget} leaves")
    return root


# ---------------------------------------------------------------------------
# marginal chaining


def _label(i: int, dx: int) -> str:
    return f"l{i}" if i < dx else f"m{i - dx}"


@dataclass(frozen=True)
class Bound:
    """One endpoint of a marginal's feasible range.

    The marginal equals ``value`` at this endpoint.  Symbolically it equals
    the constant ``value`` when ``partner`` is None, otherwise
    ``partner`` (``flip == 0``) or ``1 - partner`` (``flip == 1``), where
    ``partner`` indexes the marginals as l0.., m0...  Values are stored as
    integers over a common ``scale``.
    """

    num: int
    scale: int
    partner: Optional[int] = None
    flip: int = 0
    source: Optional[Tuple[int, int, str]] = None
    dx: int = 0

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.scale)

    @property
    def const(self) -> Optional[Fraction]:
        return self.value if self.partner is None else None

    @property
    def expr(self) -> str:
        if self.partner is None:
            return str(self.value)
        name = _label(self.partner, self.dx)
        return name if self.flip == 0 else f"1-{name}"


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True)
class OneZeroForm:
    """A binary table with a zero in every cell, described by its marginals.

    ``zero_param[x * dy + y]`` is the first zero entry of the cell (index
    into P00, P10, P01, P11); with the marginals it fixes the whole cell.
    Marginal ``i`` is ``l_i`` for ``i < dx`` and ``m_{i-dx}`` otherwise;
    ``values[i] / scale`` is its value.  ``classes[i] = (root, parity)``
    ties marginal ``i`` to its class root: value(i) = value(root) when
    parity is 0, else 1 - value(root).  ``fixed[root]`` marks classes pinned
    to a constant.  ``chain`` records the ties in the order they were made.
    """

    dx: int
    dy: int
    scale: int
    values: Tuple[int, ...]
    zero_param: Tuple[int, ...]
    classes: Tuple[Tuple[int, int], ...]
    fixed: Tuple[bool, ...]
    chain: Tuple[str, ...] = ()

    @classmethod
    def from_marginals(cls, l: Sequence[Fraction], m: Sequence[Fraction], zero_param) -> "OneZeroForm":
        dx, dy = len(l), len(m)
        scale = 2
        for v in list(l) + list(m):
            scale = _lcm(scale, Fraction(v).denominator)
        vals = tuple(int(Fraction(v) * scale) for v in list(l) + list(m))
        n = dx + dy
        return cls(dx, dy, scale, vals, tuple(zero_param), tuple((i, 0) for i in range(n)), (False,) * n)

    @classmethod
    def from_table(cls, table: CorrelationTable) -> "OneZeroForm":
        _check_binary(table)
        s = table.scenario
        mg = marginals(table)
        zp = []
        for x, y in s.cells():
            cell = _cell_tuple(table, x, y)
            if ZERO not in cell:
                raise NsboxError(f"cell ({x},{y}) has no zero entry")
            zp.append(cell.index(ZERO))
        form = cls.from_marginals(mg.l, mg.m, zp)
        if form.table() != table:
            raise NsboxError("table is not determined by its zero pattern and marginals")
        return form

    @property
    def scenario(self) -> Scenario:
        return Scenario(self.dx, self.dy, 2, 2)

    @property
    def l(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(v, self.scale) for v in self.values[: self.dx])

    @property
    def m(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(v, self.scale) for v in self.values[self.dx:])

    def value(self, i: int) -> Fraction:
        return Fraction(self.values[i], self.scale)

    def icell(self, x: int, y: int) -> Tuple[int, int, int, int]:
        """Cell entries scaled by ``scale``."""
        l, m = self.values[x], self.values[self.dx + y]
        S = self.scale
        c = (0, m, l, l + m - S)[self.zero_param[x * self.dy + y]]
        return (c, m - c, l - c, S + c - m - l)

    def cell(self, x: int, y: int) -> Tuple[Fraction, ...]:
        return tuple(Fraction(v, self.scale) for v in self.icell(x, y))

    def key(self):
        return tuple(self.icell(x, y) for x in range(self.dx) for y in range(self.dy))

    def table(self) -> CorrelationTable:
        return _table_from_cells(
            self.scenario,
            tuple(self.cell(x, y) for x in range(self.dx) for y in range(self.dy)),
        )

    def zero_pattern(self) -> dict:
        return {
            (x, y): tuple(ENTRY_NAMES[i] for i, v in enumerate(self.icell(x, y)) if v == 0)
            for x in range(self.dx)
            for y in range(self.dy)
        }

    def is_free(self, i: int) -> bool:
        return not self.fixed[self.classes[i][0]]

    def free_marginals(self) -> List[int]:
        return [i for i in range(self.dx + self.dy) if self.is_free(i)]

    def n_zeros(self) -> int:
        return sum(v == 0 for cell in self.key() for v in cell)

    def n_ties(self) -> int:
        """Number of recorded relations (class merges plus pinned classes)."""
        roots = {r for r, _ in self.classes}
        n = self.dx + self.dy
        return (n - len(roots)) + sum(self.fixed[r] for r in roots)

    # -- symbolic helpers --------------------------------------------------

    def _affine(self, i: int, root: int, par: int):
        """Marginal ``i`` as ``(alpha, gamma, kappa, partner)`` in the target's variable u.

        value(i) = alpha * u + gamma * value(partner) + kappa (scaled).
        """
        ri, pi = self.classes[i]
        if ri == root:
            if pi == par:
                return 1, 0, 0, None
            return -1, 0, self.scale, None
        if self.fixed[ri]:
            return 0, 0, self.values[i], None
        return 0, 1, 0, i

    def with_value(self, target: int, u: int) -> "OneZeroForm":
        """Move the target's class so that the target marginal equals ``u / scale``."""
        root, par = self.classes[target]
        S = self.scale
        vals = tuple(
            (u if p == par else S - u) if r == root else v
            for v, (r, p) in zip(self.values, self.classes)
        )
        return OneZeroForm(
            self.dx, self.dy, S, vals, self.zero_param, self.classes, self.fixed, self.chain
        )

    def tie(self, target: int, bound: Bound) -> "OneZeroForm":
        """Record ``target == bound`` (constant or partner relation)."""
        classes = list(self.classes)
        fixed = list(self.fixed)
        root, par = classes[target]
        if bound.partner is None:
            fixed[root] = True
        else:
            proot, ppar = classes[bound.partner]
            # target = partner ^ flip  =>  root ^ par = proot ^ ppar ^ flip
            rel_par = par ^ ppar ^ bound.flip
            for i, (r, p) in enumerate(classes):
                if r == root:
                    classes[i] = (proot, p ^ rel_par)
            fixed[proot] = fixed[proot] or fixed[root]
        rel = f"{_label(target, self.dx)} = {bound.expr}"
        return OneZeroForm(
            self.dx,
            self.dy,
            self.scale,
            self.values,
            self.zero_param,
            tuple(classes),
            tuple(fixed),
            self.chain + (rel,),
        )


def marginal_bounds(form: OneZeroForm, which: int) -> Tuple[Bound, Bound]:
    """Feasible range of free marginal ``which`` with every zero kept.

    Only the marginal's own class moves; all other marginals are held.
    Each cell touching the class contributes the positivity of its
    nonzero entries and the persistence of its zero entries; the result is
    the largest lower bound and the smallest upper bound, ties broken by
    the first cell (x outer, y inner) and entry in P00, P10, P01, P11 order.
    """
    if not form.is_free(which):
        raise NsboxError(f"marginal {_label(which, form.dx)} is already fixed")
    dx, dy, S = form.dx, form.dy, form.scale
    root, par = form.classes[which]
    lower = upper = None  # (num, partner, flip, source)
    for x in range(dx):
        in_l = form.classes[x][0] == root
        for y in range(dy):
            if not in_l and form.classes[dx + y][0] != root:
                continue
            la, lg, lk, lp = form._affine(x, root, par)
            ma, mg, mk, mp = form._affine(dx + y, root, par)
            partner = lp if lp is not None else mp
            k = form.zero_param[x * dy + y]
            if k == 0:
                c = (0, 0, 0)
            elif k == 1:
                c = (ma, mg, mk)
            elif k == 2:
                c = (la, lg, lk)
            else:
                c = (la + ma, lg + mg, lk + mk - S)
            entries = (
                c,
                (ma - c[0], mg - c[1], mk - c[2]),
                (la - c[0], lg - c[1], lk - c[2]),
                (c[0] - ma - la, c[1] - mg - lg, S + c[2] - mk - lk),
            )
            current = form.icell(x, y)
            w = form.values[partner] if partner is not None else 0
            for idx, (alpha, gamma, kappa) in enumerate(entries):
                if alpha == 0:
                    continue
                num, rem = divmod(-(gamma * w + kappa), alpha)
                assert rem == 0, "bound is not on the value grid"
                if gamma == 0:
                    cand = (num, None, 0, (x, y, idx))
                elif -gamma == alpha and kappa == 0:
                    cand = (num, partner, 0, (x, y, idx))
                elif gamma == alpha and kappa == -alpha * S:
                    cand = (num, partner, 1, (x, y, idx))
                else:  # pragma: no cover - excluded by the cell algebra
                    raise AssertionError("unexpected bound shape")
                zero = current[idx] == 0
                if (zero or alpha > 0) and (lower is None or num > lower[0]):
                    lower = cand
                if (zero or alpha < 0) and (upper is None or num < upper[0]):
                    upper = cand

    def mk(c, default):
        if c is None:
            return Bound(default, S, dx=dx)
        num, partner, flip, (x, y, idx) = c
        return Bound(num, S, partner, flip, (x, y, ENTRY_NAMES[idx]), dx)

    lo, hi = mk(lower, 0), mk(upper, S)
    if lo.num > hi.num:
        raise AssertionError(f"empty range for {_label(which, dx)}: [{lo.expr}, {hi.expr}]")
    return lo, hi


@dataclass(frozen=True)
class ChainStep:
    """One pass of the chaining loop on marginal ``marginal``.

    ``children`` lists ``(weight, form)`` with weights summing to one; a
    single child of weight 1 means the range was degenerate (or the
    marginal already sat on an endpoint) and only a tie was recorded.
    """

    marginal: int
    lower: Bound
    upper: Bound
    children: Tuple[Tuple[Fraction, OneZeroForm], ...]
    step: Optional[SplitStep]


def _chain_step(form: OneZeroForm):
    free = form.free_marginals()
    if not free:
        return None
    t = free[0]
    lo, hi = marginal_bounds(form, t)
    if lo.num == hi.num:
        return t, lo, hi, None, ((ONE, form.tie(t, lo)),)
    u = form.values[t]
    lam = Fraction(hi.num - u, hi.num - lo.num)
    kids = []
    if lam:
        kids.append((lam, form.with_value(t, lo.num).tie(t, lo)))
    if lam != 1:
        kids.append((1 - lam, form.with_value(t, hi.num).tie(t, hi)))
    return t, lo, hi, lam, tuple(kids)


def _chain_description(form, t, lo, hi, lam):
    name = _label(t, form.dx)
    if lam is None:
        return f"tie {name} = {lo.expr}"
    return (
        f"marginal {name}={form.value(t)} in [{lo.expr}={lo.value}, {hi.expr}={hi.value}], "
        f"weight {lam}"
    )


def chain_split(form: OneZeroForm) -> Optional[ChainStep]:
    """Split on the first free marginal (l0, l1, ..., m0, m1, ...); None when all are fixed."""
    res = _chain_step(form)
    if res is None:
        return None
    t, lo, hi, lam, kids = res
    step = None
    if lam is not None:
        f_lo = form.with_value(t, lo.num).tie(t, lo)
        f_hi = form.with_value(t, hi.num).tie(t, hi)
        step = SplitStep(lam, f_lo.table(), f_hi.table(), _chain_description(form, t, lo, hi, lam))
    return ChainStep(t, lo, hi, kids, step)


# ---------------------------------------------------------------------------
# full pipeline


@dataclass(frozen=True)
class Table2Component:
    weight: Fraction
    table: CorrelationTable
    spec: ExtremalSpec
    relabeling: LocalRelabeling  # maps table2_box(spec) onto table


@dataclass(frozen=True)
class Table2Decomposition:
    target: CorrelationTable
    components: Tuple[Table2Component, ...]
    trace: Tuple[str, ...] = ()
    n_leaves: int = 0  # leaves before merging identical tables

    def as_convex(self) -> ConvexDecomposition:
        return ConvexDecomposition(tuple((c.weight, c.table) for c in self.components), self.target)

    def reconstruct(self) -> CorrelationTable:
        return mix((c.weight, c.table) for c in self.components)

    def nonlocal_weight(self) -> Fraction:
        return sum((c.weight for c in self.components if not c.spec.is_local), ZERO)


class PartialDecomposition(BudgetExceeded):
    """Leaf budget exhausted; carries what was finished and the open frontier."""

    def __init__(self, message, done, frontier):
        super().__init__(message)
        self.done = done
        self.frontier = frontier


def _chain_leaves(form: OneZeroForm, weight: Fraction, trace: Optional[list], depth0: int = 0):
    stack = [(form, weight, depth0)]
    while stack:
        f, w, depth = stack.pop()
        res = _chain_step(f)
        if res is None:
            yield w, f
            continue
        t, lo, hi, lam, kids = res
        if trace is not None:
            trace.append("  " * depth + _chain_description(f, t, lo, hi, lam))
        for cw, cf in reversed(kids):
            stack.append((cf, w * cw, depth + 1))


def _part1_leaves(cells, l, m, dy, trace: Optional[list]):
    """Cell-zeroing leaves as ``(weight, zero_param)`` without building tables."""
    n = len(cells)
    out = []

    def rec(i, cur, w, zp, depth):
        while i < n and ZERO in cur[i]:
            zp = zp + (cur[i].index(ZERO),)
            i += 1
        if i == n:
            out.append((w, zp))
            return
        x, y = divmod(i, dy)
        lam, first, second, lo, hi = _cell_split(cur[i], l[x], m[y])
        if trace is not None:
            trace.append("  " * depth + f"cell ({x},{y}): c={cur[i][0]} in [{lo},{hi}], weight {lam}")
        for cw, cell in ((lam, first), (1 - lam, second)):
            if cw:
                rec(i + 1, cur, w * cw, zp + (cell.index(ZERO),), depth + 1)

    rec(0, cells, ONE, (), 0)
    return out


def decompose_to_table2(
    table: CorrelationTable,
    budget: int = DEFAULT_LEAF_BUDGET,
    trace: bool = False,
) -> Table2Decomposition:
    """Exhaustive two-stage decomposition into relabeled catalog boxes.

    Identical leaves are merged; each component carries the catalog spec and
    the relabeling that produces it.  Weights are exact and the weighted sum
    of components equals ``table``.
    """
    _check_binary(table)
    s = table.scenario
    lines: Optional[list] = [] if trace else None
    mg = marginals(table)
    l, m = tuple(mg.l), tuple(mg.m)
    cells = [_cell_tuple(table, x, y) for x, y in s.cells()]
    part1 = _part1_leaves(cells, l, m, s.dy, lines)
    if len(part1) > budget:
        raise PartialDecomposition(f"cell-zeroing exceeds {budget} leaves", (), ())
    acc: dict = {}
    count = 0
    for j, (w1, zp) in enumerate(part1):
        form = OneZeroForm.from_marginals(l, m, zp) if j == 0 else replace(base, zero_param=zp)
        base = form
        if lines is not None:
            lines.append(f"one-zero leaf {j} (weight {w1}): zeros at {list(zp)}")
        for w, leaf in _chain_leaves(form, w1, lines, 1):
            key = leaf.key()
            acc[key] = acc.get(key, ZERO) + w
            count += 1
            if count > budget:
                done = tuple((cw, _table_from_icells(s, k, base.scale)) for k, cw in acc.items())
                frontier = tuple(
                    (fw, replace(base, zero_param=fzp).table()) for fw, fzp in part1[j + 1:]
                )
                raise PartialDecomposition(
                    f"decomposition exceeds {budget} leaves", done, frontier
                )
    comps = []
    for key in sorted(acc):
        t = _table_from_icells(s, key, base.scale)
        spec, r = _identify_cached(t)
        comps.append(Table2Component(acc[key], t, spec, r))
    comps.sort(key=lambda c: c.table.flat())
    return Table2Decomposition(table, tuple(comps), tuple(lines or ()), count)


def _table_from_cells(s: Scenario, key) -> CorrelationTable:
    p = [[[[None, None], [None, None]] for _ in range(s.dy)] for _ in range(s.dx)]
    for i, cell in enumerate(key):
        x, y = divmod(i, s.dy)
        for idx, v in enumerate(cell):
            p[x][y][idx % 2][idx // 2] = v
    return CorrelationTable(s, p)


def _table_from_icells(s: Scenario, key, scale: int) -> CorrelationTable:
    return _table_from_cells(s, [[Fraction(v, scale) for v in cell] for cell in key])


_IDENTIFY_CACHE: dict = {}


def _identify_cached(t: CorrelationTable):
    hit = _IDENTIFY_CACHE.get(t)
    if hit is None:
        if len(_IDENTIFY_CACHE) > 100_000:
            _IDENTIFY_CACHE.clear()
        hit = identify_spec(t)
        _IDENTIFY_CACHE[t] = hit
    return hit


def witness_extremal(table: CorrelationTable) -> Table2Component:
    """Follow a single branch (always k = 1) down to one catalog extremal.

    The returned weight is the probability of that branch; the component
    appears with at least this weight in the full decomposition.
    """
    _check_binary(table)
    t = table
    w = ONE
    for x, y in t.scenario.cells():
        step = zero_cell_split(t, (x, y))
        if step.weight:
            t, w = step.branch_low, w * step.weight
        else:
            t = step.branch_high
    form = OneZeroForm.from_table(t)
    while True:
        res = _chain_step(form)
        if res is None:
            break
        cw, form = res[4][0]
        w *= cw
    leaf = form.table()
    spec, r = _identify_cached(leaf)
    return Table2Component(w, leaf, spec, r)
