"""Exact conditional probability tables P(a,b|x,y) and their basic constraints.

Entries are indexed ``(x, y, a, b)``.  When a cell is drawn as a grid the
rows are Bob's output ``b`` and the columns Alice's output ``a``, so the cell
``(x, y)`` of a binary table reads::

    P(0,0|x,y)  P(1,0|x,y)
    P(0,1|x,y)  P(1,1|x,y)
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BudgetExceeded, ShapeError, SignalingError

DEFAULT_ORBIT_BUDGET = 10**7


@dataclass(frozen=True)
class Scenario:
    dx: int
    dy: int
    da: int = 2
    db: int = 2

    def __post_init__(self):
        for name in ("dx", "dy", "da", "db"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ShapeError(f"scenario dimension {name}={v!r} must be a positive integer")

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (self.dx, self.dy, self.da, self.db)

    @property
    def n_vars(self) -> int:
        return self.dx * self.dy * self.da * self.db

    @property
    def binary(self) -> bool:
        return self.da == 2 and self.db == 2

    def index(self, x: int, y: int, a: int, b: int) -> int:
        return ((x * self.dy + y) * self.da + a) * self.db + b

    def unindex(self, i: int) -> Tuple[int, int, int, int]:
        i, b = divmod(i, self.db)
        i, a = divmod(i, self.da)
        x, y = divmod(i, self.dy)
        return x, y, a, b

    def cells(self):
        return itertools.product(range(self.dx), range(self.dy))

    def __str__(self):
        return f"({self.dx},{self.dy},{self.da},{self.db})"


def _frac_array(values, shape) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    flat = arr.reshape(-1)
    src = np.asarray(values, dtype=object).reshape(-1)
    for i, v in enumerate(src):
        flat[i] = v if isinstance(v, Fraction) else Fraction(v)
    return arr


class CorrelationTable:
    """An immutable table of exact probabilities P(a,b|x,y).

    Construction only checks the shape; positivity, normalization and
    no-signalling are reported by :func:`validate` and
    :func:`is_nonsignaling`, so invalid tables can be built and inspected.
    """

    __slots__ = ("scenario", "_p", "_key")

    def __init__(self, scenario: Scenario, entries):
        arr = np.asarray(entries, dtype=object)
        if arr.shape != scenario.shape:
            if arr.size == scenario.n_vars and arr.ndim == 1:
                arr = arr.reshape(scenario.shape)
            else:
                raise ShapeError(f"entries have shape {arr.shape}, scenario {scenario} needs {scenario.shape}")
        p = _frac_array(arr, scenario.shape)
        p.flags.writeable = False
        self.scenario = scenario
        self._p = p
        self._key = None

    @classmethod
    def from_function(cls, scenario: Scenario, f: Callable[[int, int, int, int], object]):
        vals = [f(*scenario.unindex(i)) for i in range(scenario.n_vars)]
        return cls(scenario, vals)

    @property
    def entries(self) -> np.ndarray:
        return self._p

    def flat(self) -> Tuple[Fraction, ...]:
        if self._key is None:
            self._key = tuple(self._p.reshape(-1))
        return self._key

    def __getitem__(self, idx):
        return self._p[idx]

    def cell(self, x: int, y: int) -> np.ndarray:
        """The ``(da, db)`` block of cell ``(x, y)``, indexed ``[a, b]``."""
        return self._p[x, y]

    def cell_grid(self, x: int, y: int) -> List[List[Fraction]]:
        """Cell ``(x, y)`` as drawn in the tables: rows ``b``, columns ``a``."""
        c = self._p[x, y]
        return [[c[a, b] for a in range(self.scenario.da)] for b in range(self.scenario.db)]

    def zeros(self) -> List[int]:
        return [i for i, v in enumerate(self.flat()) if v == 0]

    def __eq__(self, other):
        if not isinstance(other, CorrelationTable):
            return NotImplemented
        return self.scenario == other.scenario and self.flat() == other.flat()

    def __hash__(self):
        return hash((self.scenario, self.flat()))

    def __repr__(self):
        return f"CorrelationTable{self.scenario}\n{to_text(self)}"


def to_text(table: CorrelationTable) -> str:
    s = table.scenario
    rows = []
    for y in range(s.dy):
        for b in range(s.db):
            parts = []
            for x in range(s.dx):
                parts.append(" ".join(f"{str(table[x, y, a, b]):>5}" for a in range(s.da)))
            prefix = f"y={y} " if b == 0 else "    "
            rows.append(prefix + " | ".join(parts))
        if y != s.dy - 1:
            rows.append("")
    return "\n".join(rows)


def mix(components: Iterable[Tuple[object, CorrelationTable]]) -> CorrelationTable:
    """Exact weighted sum ``sum_i w_i * T_i``."""
    components = list(components)
    if not components:
        raise ValueError("nothing to mix")
    scenario = components[0][1].scenario
    acc = np.full(scenario.shape, Fraction(0), dtype=object)
    for w, t in components:
        if t.scenario != scenario:
            raise ShapeError("cannot mix tables from different scenarios")
        acc = acc + Fraction(w) * t.entries
    return CorrelationTable(scenario, acc)


def deterministic_table(scenario: Scenario, f: Sequence[int], g: Sequence[int]) -> CorrelationTable:
    """The local deterministic point P = delta(a, f(x)) delta(b, g(y))."""
    return CorrelationTable.from_function(
        scenario, lambda x, y, a, b: Fraction(int(a == f[x] and b == g[y]))
    )


def uniform_table(scenario: Scenario) -> CorrelationTable:
    v = Fraction(1, scenario.da * scenario.db)
    return CorrelationTable(scenario, [v] * scenario.n_vars)


# ---------------------------------------------------------------------------
# constraint checks


@dataclass(frozen=True)
class Violation:
    kind: str  # "positivity" | "normalization"
    index: tuple
    value: Fraction


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate(table: CorrelationTable) -> ValidationReport:
    """Positivity of every entry and normalization of every cell, exactly."""
    s = table.scenario
    if table.entries.shape != s.shape:
        raise ShapeError("entries do not match scenario")
    out = []
    for x, y in s.cells():
        c = table.cell(x, y)
        for a in range(s.da):
            for b in range(s.db):
                if c[a, b] < 0:
                    out.append(Violation("positivity", (x, y, a, b), c[a, b]))
        total = sum(c.reshape(-1), Fraction(0))
        if total != 1:
            out.append(Violation("normalization", (x, y), total))
    return ValidationReport(tuple(out))


@dataclass(frozen=True)
class NonsignalingReport:
    """Violated no-signalling equalities.

    Alice-side entries are ``("alice", a, x, y, y2)``: P(a|x) computed at
    ``y`` differs from the value at ``y2``.  Bob-side entries are
    ``("bob", b, x, x2, y)``.
    """

    violations: Tuple[tuple, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _alice_cond(table, x, y):
    return table.entries[x, y].sum(axis=1)


def _bob_cond(table, x, y):
    return table.entries[x, y].sum(axis=0)


def is_nonsignaling(table: CorrelationTable) -> NonsignalingReport:
    s = table.scenario
    out = []
    for x in range(s.dx):
        ref = _alice_cond(table, x, 0)
        for y2 in range(1, s.dy):
            other = _alice_cond(table, x, y2)
            for a in range(s.da):
                if ref[a] != other[a]:
                    out.append(("alice", a, x, 0, y2))
    for y in range(s.dy):
        ref = _bob_cond(table, 0, y)
        for x2 in range(1, s.dx):
            other = _bob_cond(table, x2, y)
            for b in range(s.db):
                if ref[b] != other[b]:
                    out.append(("bob", b, 0, x2, y))
    return NonsignalingReport(tuple(out))


@dataclass(frozen=True)
class Marginals:
    alice: Tuple[Tuple[Fraction, ...], ...]
    bob: Tuple[Tuple[Fraction, ...], ...]

    @property
    def l(self) -> Optional[Tuple[Fraction, ...]]:
        """P(a=0|x) per x, binary outputs only."""
        if len(self.alice[0]) != 2:
            return None
        return tuple(row[0] for row in self.alice)

    @property
    def m(self) -> Optional[Tuple[Fraction, ...]]:
        """P(b=0|y) per y, binary outputs only."""
        if len(self.bob[0]) != 2:
            return None
        return tuple(row[0] for row in self.bob)


def marginals(table: CorrelationTable) -> Marginals:
    report = is_nonsignaling(table)
    if not report.ok:
        raise SignalingError(f"marginals are ill-defined, violated equality {report.violations[0]}")
    s = table.scenario
    alice = tuple(tuple(_alice_cond(table, x, 0)) for x in range(s.dx))
    bob = tuple(tuple(_bob_cond(table, 0, y)) for y in range(s.dy))
    return Marginals(alice, bob)


# ---------------------------------------------------------------------------
# local relabelings


def _is_perm(p, n):
    return len(p) == n and sorted(p) == list(range(n))


def _inv(p):
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


@dataclass(frozen=True)
class LocalRelabeling:
    """Input permutations plus input-dependent output permutations.

    Old input ``x`` becomes ``alice_input_perm[x]`` and, at that input, old
    output ``a`` becomes ``alice_output_perms[x][a]`` (outputs are indexed
    by the *old* input).  Likewise for Bob.
    """

    alice_input_perm: Tuple[int, ...]
    bob_input_perm: Tuple[int, ...]
    alice_output_perms: Tuple[Tuple[int, ...], ...]
    bob_output_perms: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "alice_input_perm", tuple(self.alice_input_perm))
        object.__setattr__(self, "bob_input_perm", tuple(self.bob_input_perm))
        object.__setattr__(self, "alice_output_perms", tuple(tuple(p) for p in self.alice_output_perms))
        object.__setattr__(self, "bob_output_perms", tuple(tuple(p) for p in self.bob_output_perms))
        dx, dy = len(self.alice_input_perm), len(self.bob_input_perm)
        if not _is_perm(self.alice_input_perm, dx) or not _is_perm(self.bob_input_perm, dy):
            raise ShapeError("input relabelings must be permutations")
        if len(self.alice_output_perms) != dx or len(self.bob_output_perms) != dy:
            raise ShapeError("need one output permutation per input")
        for p in self.alice_output_perms + self.bob_output_perms:
            if not _is_perm(p, len(p)):
                raise ShapeError(f"{p} is not a permutation")

    @classmethod
    def identity(cls, scenario: Scenario) -> "LocalRelabeling":
        return cls(
            tuple(range(scenario.dx)),
            tuple(range(scenario.dy)),
            (tuple(range(scenario.da)),) * scenario.dx,
            (tuple(range(scenario.db)),) * scenario.dy,
        )

    def matches(self, scenario: Scenario) -> bool:
        return (
            len(self.alice_input_perm) == scenario.dx
            and len(self.bob_input_perm) == scenario.dy
            and all(len(p) == scenario.da for p in self.alice_output_perms)
            and all(len(p) == scenario.db for p in self.bob_output_perms)
        )

    def inverse(self) -> "LocalRelabeling":
        # new input x' came from old x = inv[x']; its output map is inverted too
        ia, ib = _inv(self.alice_input_perm), _inv(self.bob_input_perm)
        return LocalRelabeling(
            ia,
            ib,
            tuple(_inv(self.alice_output_perms[ia[xn]]) for xn in range(len(ia))),
            tuple(_inv(self.bob_output_perms[ib[yn]]) for yn in range(len(ib))),
        )

    def then(self, other: "LocalRelabeling") -> "LocalRelabeling":
        """Apply ``self`` first, then ``other``."""
        pa = tuple(other.alice_input_perm[v] for v in self.alice_input_perm)
        pb = tuple(other.bob_input_perm[v] for v in self.bob_input_perm)
        oa = tuple(
            tuple(other.alice_output_perms[self.alice_input_perm[x]][v] for v in perm)
            for x, perm in enumerate(self.alice_output_perms)
        )
        ob = tuple(
            tuple(other.bob_output_perms[self.bob_input_perm[y]][v] for v in perm)
            for y, perm in enumerate(self.bob_output_perms)
        )
        return LocalRelabeling(pa, pb, oa, ob)


def apply_relabeling(table: CorrelationTable, r: LocalRelabeling) -> CorrelationTable:
    s = table.scenario
    if not r.matches(s):
        raise ShapeError(f"relabeling does not match scenario {s}")
    old = table.entries
    new = np.empty(s.shape, dtype=object)
    for x, y in s.cells():
        xn, yn = r.alice_input_perm[x], r.bob_input_perm[y]
        sa, sb = r.alice_output_perms[x], r.bob_output_perms[y]
        for a in range(s.da):
            for b in range(s.db):
                new[xn, yn, sa[a], sb[b]] = old[x, y, a, b]
    return CorrelationTable(s, new)


def orbit_size(scenario: Scenario) -> int:
    s = scenario
    f = math.factorial
    return f(s.dx) * f(s.dy) * f(s.da) ** s.dx * f(s.db) ** s.dy


def _scaled_ints(table: CorrelationTable):
    flat = table.flat()
    lcd = 1
    for v in flat:
        lcd = lcd * v.denominator // math.gcd(lcd, v.denominator)
    ints = [int(v * lcd) for v in flat]
    if max(abs(v) for v in ints) < 2**62:
        return np.array(ints, dtype=np.int64)
    return np.array(ints, dtype=object)


def canonical_form(
    table: CorrelationTable, budget: int = DEFAULT_ORBIT_BUDGET
) -> Tuple[CorrelationTable, LocalRelabeling]:
    """Orbit representative under local relabelings.

    The representative is the lexicographically largest flattened entry
    array (flattening order ``x, y, a, b``), which sends every
    deterministic point to the all-outputs-zero point.  Returns the
    representative and one relabeling mapping ``table`` onto it.
    """
    s = table.scenario
    size = orbit_size(s)
    if size > budget:
        raise BudgetExceeded(f"relabeling orbit of {s} has {size} elements, budget is {budget}")
    vals = _scaled_ints(table)
    exact = vals.dtype != object
    perms_a = np.array(list(itertools.permutations(range(s.da))), dtype=np.int64)
    perms_b = np.array(list(itertools.permutations(range(s.db))), dtype=np.int64)
    combos = np.array(
        list(itertools.product(range(len(perms_a)), repeat=s.dx)), dtype=np.int64
    ).reshape(-1, s.dx)
    combos_b = np.array(
        list(itertools.product(range(len(perms_b)), repeat=s.dy)), dtype=np.int64
    ).reshape(-1, s.dy)
    # all output-permutation choices at once: (K, dx, da) and (K, dy, db)
    ka, kb = len(combos), len(combos_b)
    sig = perms_a[combos][:, None]  # (ka, 1, dx, da)
    tau = perms_b[combos_b][None, :]  # (1, kb, dy, db)
    sig = np.broadcast_to(sig, (ka, kb, s.dx, s.da)).reshape(-1, s.dx, s.da)
    tau = np.broadcast_to(tau, (ka, kb, s.dy, s.db)).reshape(-1, s.dy, s.db)
    sig_b = sig[:, :, None, :, None]
    tau_b = tau[:, None, :, None, :]

    best = None
    best_src = None
    for alpha in itertools.permutations(range(s.dx)):
        al = np.array(alpha, dtype=np.int64)[:, None, None, None]
        for beta in itertools.permutations(range(s.dy)):
            be = np.array(beta, dtype=np.int64)[None, :, None, None]
            # src[k, x', y', a', b'] = old flat index feeding new position
            src = ((al * s.dy + be) * s.da + sig_b) * s.db + tau_b
            src = src.reshape(len(sig), -1)
            cand = vals[src]
            if exact:
                order = np.lexsort(cand.T[::-1])
                k = order[-1]
                row = tuple(cand[k].tolist())
            else:
                k = max(range(len(cand)), key=lambda i: tuple(cand[i]))
                row = tuple(cand[k])
            if best is None or row > best:
                best = row
                best_src = (alpha, beta, sig[k].copy(), tau[k].copy())
    alpha, beta, sg, tu = best_src
    # new[x',y',a',b'] = old[alpha[x'], beta[y'], sg[x'][a'], tu[y'][b']]
    ia = _inv(alpha)
    ib = _inv(beta)
    r = LocalRelabeling(
        ia,
        ib,
        tuple(_inv(tuple(int(v) for v in sg[ia[x]])) for x in range(s.dx)),
        tuple(_inv(tuple(int(v) for v in tu[ib[y]])) for y in range(s.dy)),
    )
    canon = apply_relabeling(table, r)
    return canon, r


def equivalent(t1: CorrelationTable, t2: CorrelationTable, budget: int = DEFAULT_ORBIT_BUDGET) -> bool:
    if t1.scenario != t2.scenario:
        return False
    return canonical_form(t1, budget)[0] == canonical_form(t2, budget)[0]
