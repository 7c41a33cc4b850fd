"""Exact convex geometry on the no-signalling polytope.

Locality is decided by exact phase-I simplex over the deterministic
strategies, extremality by the rank of the constraints tight at a point,
and decompositions by walking along nullspace directions to the boundary.
:func:`enumerate_vertices` is an independent double-description oracle for
small scenarios.
"""
from __future__ import annotations

import functools
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .core import CorrelationTable, Scenario, is_nonsignaling, mix, validate
from .errors import BudgetExceeded, NsboxError, SignalingError
from .simplex import feasible_point

logger = logging.getLogger(__name__)

DEFAULT_STRATEGY_BUDGET = 4096
DEFAULT_VERTEX_VAR_CAP = 64


@dataclass(frozen=True)
class ConstraintSystem:
    """Equalities (normalization and no-signalling) and positivity rows.

    Variable ``i`` is the entry ``scenario.unindex(i)``; positivity row ``i``
    is simply ``p_i >= 0``.
    """

    scenario: Scenario
    eq_rows: Tuple[Tuple[int, ...], ...]
    eq_rhs: Tuple[int, ...]
    eq_labels: Tuple[tuple, ...]

    @property
    def n_vars(self) -> int:
        return self.scenario.n_vars

    def variable(self, i: int) -> Tuple[int, int, int, int]:
        return self.scenario.unindex(i)

    def index(self, x, y, a, b) -> int:
        return self.scenario.index(x, y, a, b)


@functools.lru_cache(maxsize=None)
def constraint_system(scenario: Scenario) -> ConstraintSystem:
    s = scenario
    n = s.n_vars
    rows, rhs, labels = [], [], []
    for x, y in s.cells():
        r = [0] * n
        for a in range(s.da):
            for b in range(s.db):
                r[s.index(x, y, a, b)] = 1
        rows.append(tuple(r)), rhs.append(1), labels.append(("normalization", x, y))
    for x in range(s.dx):
        for a in range(s.da):
            for y in range(1, s.dy):
                r = [0] * n
                for b in range(s.db):
                    r[s.index(x, y, a, b)] += 1
                    r[s.index(x, 0, a, b)] -= 1
                rows.append(tuple(r)), rhs.append(0), labels.append(("alice", a, x, 0, y))
    for y in range(s.dy):
        for b in range(s.db):
            for x in range(1, s.dx):
                r = [0] * n
                for a in range(s.da):
                    r[s.index(x, y, a, b)] += 1
                    r[s.index(0, y, a, b)] -= 1
                rows.append(tuple(r)), rhs.append(0), labels.append(("bob", b, 0, x, y))
    return ConstraintSystem(s, tuple(rows), tuple(rhs), tuple(labels))


@functools.lru_cache(maxsize=None)
def affine_parametrization(scenario: Scenario):
    """``(p0, basis)`` with the affine hull ``{p0 + sum z_j basis_j}``."""
    cs = constraint_system(scenario)
    p0, basis = linalg.solve_affine(cs.eq_rows, cs.eq_rhs, cs.n_vars)
    return tuple(p0), tuple(tuple(v) for v in basis)


def dimension(scenario: Scenario) -> int:
    return len(affine_parametrization(scenario)[1])


def _require_nonsignaling(table: CorrelationTable):
    if not validate(table).ok:
        raise NsboxError("table violates positivity or normalization")
    rep = is_nonsignaling(table)
    if not rep.ok:
        raise SignalingError(f"table is signaling: {rep.violations[0]}")


def _directions(table: CorrelationTable) -> List[List[Fraction]]:
    """Basis of feasible directions keeping every zero entry at zero."""
    _, basis = affine_parametrization(table.scenario)
    zeros = table.zeros()
    k = len(basis)
    if not k:
        return []
    rows = [[basis[j][i] for j in range(k)] for i in zeros]
    null = linalg.nullspace(rows, k) if rows else [
        [Fraction(int(i == j)) for i in range(k)] for j in range(k)
    ]
    n = table.scenario.n_vars
    out = []
    for z in null:
        out.append([sum((z[j] * basis[j][i] for j in range(k) if z[j]), Fraction(0)) for i in range(n)])
    return out


# ---------------------------------------------------------------------------
# extremality


@dataclass(frozen=True)
class ExtremalityResult:
    extremal: bool
    tight: Tuple[int, ...]
    direction: Optional[Tuple[Fraction, ...]] = None

    def __bool__(self):
        return self.extremal


def is_extremal(table: CorrelationTable) -> ExtremalityResult:
    """Vertex test: equalities plus tight positivity rows have full rank.

    The certificate is the list of tight positivity rows (zero entries) or,
    for a non-vertex, a nonzero direction along which the table can move in
    both senses without leaving the polytope.
    """
    _require_nonsignaling(table)
    dirs = _directions(table)
    tight = tuple(table.zeros())
    if not dirs:
        return ExtremalityResult(True, tight)
    return ExtremalityResult(False, tight, tuple(dirs[0]))


def _boundary_step(p: Sequence[Fraction], d: Sequence[Fraction]) -> Fraction:
    """Largest t >= 0 with p + t d >= 0 (d must have a negative entry)."""
    t = None
    for pi, di in zip(p, d):
        if di < 0:
            r = -pi / di
            if t is None or r < t:
                t = r
    if t is None:
        raise NsboxError("direction does not leave the polytope")
    return t


def _table_from_flat(scenario, flat):
    return CorrelationTable(scenario, list(flat))


def walk_to_vertex(table: CorrelationTable) -> CorrelationTable:
    """Follow the first free direction to the boundary until a vertex is reached."""
    cur = table
    while True:
        dirs = _directions(cur)
        if not dirs:
            return cur
        d = dirs[0]
        p = cur.flat()
        t = _boundary_step(p, d)
        cur = _table_from_flat(cur.scenario, [pi + t * di for pi, di in zip(p, d)])


# ---------------------------------------------------------------------------
# decompositions


@dataclass(frozen=True)
class ConvexDecomposition:
    components: Tuple[Tuple[Fraction, CorrelationTable], ...]
    target: CorrelationTable

    def reconstruct(self) -> CorrelationTable:
        return mix(self.components)

    @property
    def weights(self) -> Tuple[Fraction, ...]:
        return tuple(w for w, _ in self.components)

    def check(self, extremality: bool = True) -> None:
        """Raise ``AssertionError`` unless every invariant holds exactly."""
        assert sum(self.weights, Fraction(0)) == 1, "weights do not sum to one"
        assert all(w > 0 for w in self.weights), "non-positive weight"
        assert self.reconstruct() == self.target, "reconstruction differs from target"
        if extremality:
            for _, v in self.components:
                assert is_extremal(v).extremal, "component is not extremal"

    def __len__(self):
        return len(self.components)


def merge_components(components) -> Tuple[Tuple[Fraction, CorrelationTable], ...]:
    acc = {}
    for w, t in components:
        if w == 0:
            continue
        acc[t] = acc.get(t, Fraction(0)) + w
    return tuple((w, t) for t, w in acc.items())


def caratheodory_decompose(table: CorrelationTable) -> ConvexDecomposition:
    """Exact decomposition into at most ``dim + 1`` vertices.

    Peel off a vertex ``v`` of the minimal face containing ``p``, then move
    from ``p`` away from ``v`` until a new entry hits zero; the boundary
    point lies on a lower-dimensional face and is decomposed the same way.
    """
    _require_nonsignaling(table)
    s = table.scenario
    comps = []
    remaining = Fraction(1)
    cur = table
    while True:
        v = walk_to_vertex(cur)
        if v == cur:
            comps.append((remaining, cur))
            break
        p, vf = cur.flat(), v.flat()
        d = [pi - vi for pi, vi in zip(p, vf)]
        t = _boundary_step(p, d)
        q = [pi + t * di for pi, di in zip(p, d)]
        # p = q/(1+t) + t/(1+t) v
        comps.append((remaining * t / (1 + t), v))
        remaining = remaining / (1 + t)
        cur = _table_from_flat(s, q)
    return ConvexDecomposition(merge_components(comps), table)


# ---------------------------------------------------------------------------
# locality


@dataclass(frozen=True)
class LocalModel:
    """Shared-randomness model: weights over deterministic strategy pairs."""

    weights: Tuple[Tuple[Fraction, Tuple[int, ...], Tuple[int, ...]], ...]

    def table(self, scenario: Scenario) -> CorrelationTable:
        from .core import deterministic_table

        return mix((w, deterministic_table(scenario, f, g)) for w, f, g in self.weights)


@dataclass(frozen=True)
class LocalityResult:
    local: bool
    model: Optional[LocalModel] = None
    # Bell functional: sum_i c_i p_i <= 0 for every local table, > 0 here
    bell: Optional[Tuple[Fraction, ...]] = None

    def __bool__(self):
        return self.local


def deterministic_strategies(scenario: Scenario):
    s = scenario
    for f in itertools.product(range(s.da), repeat=s.dx):
        for g in itertools.product(range(s.db), repeat=s.dy):
            yield f, g


def is_local(table: CorrelationTable, budget: int = DEFAULT_STRATEGY_BUDGET) -> LocalityResult:
    _require_nonsignaling(table)
    s = table.scenario
    count = s.da**s.dx * s.db**s.dy
    if count > budget:
        raise BudgetExceeded(f"{count} deterministic strategies exceed budget {budget}")
    strats = list(deterministic_strategies(s))
    n = s.n_vars
    cols = []
    for f, g in strats:
        col = [0] * n
        for x, y in s.cells():
            col[s.index(x, y, f[x], g[y])] = 1
        cols.append(col)
    A = [[cols[j][i] for j in range(len(cols))] for i in range(n)]
    res = feasible_point(A, table.flat())
    if res.feasible:
        model = LocalModel(tuple((w, f, g) for w, (f, g) in zip(res.x, strats) if w))
        return LocalityResult(True, model=model)
    return LocalityResult(False, bell=tuple(res.farkas))


# ---------------------------------------------------------------------------
# vertex enumeration (double description), used as an oracle


def _int_row(values) -> List[int]:
    lcd = 1
    for v in values:
        lcd = lcd * v.denominator // math.gcd(lcd, v.denominator)
    return [int(v * lcd) for v in values]


def _normalize(vec: np.ndarray) -> np.ndarray:
    g = np.gcd.reduce(np.abs(vec))
    return vec // g if g > 1 else vec


def enumerate_vertices(scenario: Scenario, cap: int = DEFAULT_VERTEX_VAR_CAP) -> List[CorrelationTable]:
    """All vertices of the no-signalling polytope of ``scenario``.

    Double description over the integers: the polytope is written in the
    coordinates of its affine hull, homogenized, and the positivity rows are
    inserted one at a time with the combinatorial adjacency test.  The
    result is sorted by entry array; equivalent vertices are all reported.
    """
    if scenario.n_vars > cap:
        raise BudgetExceeded(f"{scenario.n_vars} variables exceed the cap of {cap}")
    p0, basis = affine_parametrization(scenario)
    n = scenario.n_vars
    k = len(basis)
    dim = k + 1
    rows = [[1] + [0] * k]
    for i in range(n):
        rows.append(_int_row([p0[i]] + [basis[j][i] for j in range(k)]))
    R = np.array(rows, dtype=np.int64)

    # initial simplicial cone from the first dim independent rows
    chosen: List[int] = []
    for i in range(len(rows)):
        if linalg.rank([rows[c] for c in chosen + [i]], dim) == len(chosen) + 1:
            chosen.append(i)
        if len(chosen) == dim:
            break
    inv_cols = []
    base = [rows[c] for c in chosen]
    for j in range(dim):
        e = [Fraction(int(j == t)) for t in range(dim)]
        inv_cols.append(_int_row(linalg.solve_square(base, e)))
    rays = np.array([_normalize(np.array(c, dtype=np.int64)) for c in inv_cols], dtype=np.int64)
    processed = list(chosen)
    rest = [i for i in range(len(rows)) if i not in set(chosen)]

    for ri in rest:
        processed.append(ri)
        Rp = R[processed]
        slack = rays @ R[ri]
        pos = np.nonzero(slack > 0)[0]
        neg = np.nonzero(slack < 0)[0]
        zer = np.nonzero(slack == 0)[0]
        if len(neg) == 0:
            continue
        Z = (rays @ Rp.T == 0).astype(np.float32)  # zero sets over processed rows
        new = []
        if len(pos):
            Zn = Z[neg]
            for p in pos:
                inter = Zn * Z[p]
                counts = inter.sum(axis=1)
                cand = np.nonzero(counts >= dim - 2)[0]
                if not len(cand):
                    continue
                inter_c = inter[cand]
                contain = (inter_c @ Z.T) == counts[cand][:, None]
                ok = contain.sum(axis=1) == 2
                for ci in cand[ok]:
                    nn = neg[ci]
                    if np.abs(rays[nn]).max() * abs(slack[p]) > 2**52 or np.abs(rays[p]).max() * abs(slack[nn]) > 2**52:
                        raise BudgetExceeded("integer growth in vertex enumeration")
                    v = slack[p] * rays[nn] - slack[nn] * rays[p]
                    new.append(_normalize(v))
        keep = np.concatenate([pos, zer])
        parts = [rays[keep]]
        if new:
            parts.append(np.array(new, dtype=np.int64))
        rays = np.concatenate(parts) if parts else rays[:0]
        logger.debug("row %d: %d rays", ri, len(rays))

    out = set()
    for ray in rays:
        t = int(ray[0])
        if t <= 0:
            raise NsboxError("unbounded direction found; polytope should be bounded")
        z = [Fraction(int(v), t) for v in ray[1:]]
        p = [p0[i] + sum((z[j] * basis[j][i] for j in range(k) if z[j]), Fraction(0)) for i in range(n)]
        out.add(tuple(p))
    return [CorrelationTable(scenario, list(v)) for v in sorted(out)]
