"""Simulating catalog boxes with PR boxes, and extracting a PR box from them.

For a nonlocal catalog box the nondeterministic block obeys
``a XOR b = F(x, y)``.  Writing ``F`` as a GF(2) polynomial
``sum_i P_i(x) Q_i(y)`` (one slot per Bob monomial), the parties share one
PR box per slot: Alice feeds ``r_i = P_i(x)``, Bob feeds ``s_i = Q_i(y)``,
and each outputs the parity of its box outputs.  Since every PR box has
``a_i XOR b_i = r_i s_i`` the final outputs satisfy ``a XOR b = F(x, y)``
with uniform marginals.

A party whose input is deterministic (``x >= g_x`` or ``y >= g_y``) feeds 0
into every box and outputs 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .catalog import ExtremalSpec, pr_box, table2_box
from .core import CorrelationTable, LocalRelabeling, Scenario, apply_relabeling, mix
from .errors import NsboxError
from .gf2 import FactoredForm, Gf2Polynomial, factor, multilinear_of, n_bits


class LocalSpecError(NsboxError):
    """The operation needs a nonlocal spec (g_x, g_y >= 2)."""


def _require_nonlocal(spec: ExtremalSpec):
    if spec.is_local:
        raise LocalSpecError("spec is local (g_x = g_y = 0); no PR structure to use")


def correlation_function(spec: ExtremalSpec) -> Tuple[Tuple[int, ...], ...]:
    """``F[x][y] = a XOR b`` on the nondeterministic block, read off table2_box."""
    _require_nonlocal(spec)
    box = table2_box(spec)
    F = []
    for x in range(spec.gx):
        row = []
        for y in range(spec.gy):
            row.append(0 if box[x, y, 0, 0] != 0 else 1)
        F.append(tuple(row))
    return tuple(F)


@lru_cache(maxsize=4096)
def polynomial(spec: ExtremalSpec) -> Gf2Polynomial:
    _require_nonlocal(spec)
    return multilinear_of(correlation_function(spec), n_bits(spec.gx), n_bits(spec.gy))


@lru_cache(maxsize=4096)
def factored(spec: ExtremalSpec) -> FactoredForm:
    return factor(polynomial(spec))


@dataclass(frozen=True)
class BoxCount:
    slots: int  # PR boxes the protocol wires up: 2 ** n_y
    nonzero: int  # slots whose Alice polynomial is not identically 0


def box_count(spec: ExtremalSpec) -> BoxCount:
    f = factored(spec)
    return BoxCount(f.slots, f.nonzero_terms())


@dataclass(frozen=True)
class PrExtraction:
    """Restriction of a box to two inputs per side, with output flips.

    ``alice_inputs[x']`` is the original input used for PR input ``x'``;
    ``alice_flips[x']`` is XOR-ed into Alice's output (likewise for Bob).
    """

    spec: ExtremalSpec
    alice_inputs: Tuple[int, int]
    bob_inputs: Tuple[int, int]
    alice_flips: Tuple[int, int]
    bob_flips: Tuple[int, int]

    def table(self) -> CorrelationTable:
        box = table2_box(self.spec)

        def entry(x, y, a, b):
            return box[
                self.alice_inputs[x],
                self.bob_inputs[y],
                a ^ self.alice_flips[x],
                b ^ self.bob_flips[y],
            ]

        return CorrelationTable.from_function(Scenario(2, 2), entry)


def extract_pr(spec: ExtremalSpec) -> PrExtraction:
    """PR box from one copy of a nonlocal catalog box.

    Cells (0,0), (0,1), (1,0) of every nonlocal catalog box are correlated and
    (1,1) is anticorrelated, so restricting to inputs {0, 1} already is a PR box.
    """
    _require_nonlocal(spec)
    ext = PrExtraction(spec, (0, 1), (0, 1), (0, 0), (0, 0))
    if ext.table() != pr_box():  # pragma: no cover - guarded by the catalog definition
        raise AssertionError("catalog box does not restrict to a PR box")
    return ext


# ---------------------------------------------------------------------------
# the protocol


@dataclass(frozen=True)
class BoxRecord:
    r: int
    s: int
    a: int
    b: int


@dataclass(frozen=True)
class ProtocolRun:
    spec: ExtremalSpec
    x: int
    y: int
    boxes: Tuple[BoxRecord, ...]
    a: int
    b: int
    source: str = ""

    def check(self) -> None:
        for i, bx in enumerate(self.boxes):
            if bx.a ^ bx.b != bx.r & bx.s:
                raise AssertionError(f"box {i} violates a XOR b = r s")
        exp_a = _parity(bx.a for bx in self.boxes) if self.x < self.spec.gx else 0
        exp_b = _parity(bx.b for bx in self.boxes) if self.y < self.spec.gy else 0
        if (self.a, self.b) != (exp_a, exp_b):
            raise AssertionError("final outputs are not the box-output parities")

    def line(self, trial: int) -> str:
        boxes = " ".join(f"{bx.r}{bx.s}{bx.a}{bx.b}" for bx in self.boxes)
        return f"{trial} x={self.x} y={self.y} rsab={boxes} a={self.a} b={self.b}"


def _parity(bits: Iterable[int]) -> int:
    v = 0
    for b in bits:
        v ^= b
    return v


def _check_inputs(spec: ExtremalSpec, x: int, y: int):
    if not (0 <= x < spec.dx and 0 <= y < spec.dy):
        raise NsboxError(f"inputs ({x},{y}) out of range for {spec.dx}x{spec.dy}")


def box_inputs(spec: ExtremalSpec, x: int, y: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """``(r, s)``: what Alice and Bob feed into each PR box."""
    _check_inputs(spec, x, y)
    if spec.is_local:
        return (), ()
    f = factored(spec)
    r = tuple(f.alice_bit(i, x) if x < spec.gx else 0 for i in range(f.slots))
    s = tuple(f.bob_bit(i, y) if y < spec.gy else 0 for i in range(f.slots))
    return r, s


def simulate_exact(spec: ExtremalSpec, x: int, y: int) -> Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
    """Exact output distribution ``cell[a][b]`` of the protocol at ``(x, y)``.

    Averages over all equally likely Alice-side box outputs; Bob's box
    outputs follow from the PR law.
    """
    r, s = box_inputs(spec, x, y)
    k = len(r)
    alice_on, bob_on = x < spec.gx, y < spec.gy
    counts = [[0, 0], [0, 0]]
    for bits in range(1 << k):
        ai = [(bits >> i) & 1 for i in range(k)]
        bi = [ai[i] ^ (r[i] & s[i]) for i in range(k)]
        a = _parity(ai) if alice_on else 0
        b = _parity(bi) if bob_on else 0
        counts[a][b] += 1
    total = 1 << k
    return tuple(tuple(Fraction(c, total) for c in row) for row in counts)


def simulate_table(spec: ExtremalSpec) -> CorrelationTable:
    """Full table produced by the protocol; equals ``table2_box(spec)``."""
    cells = {(x, y): simulate_exact(spec, x, y) for x in range(spec.dx) for y in range(spec.dy)}
    return CorrelationTable.from_function(spec.scenario, lambda x, y, a, b: cells[x, y][a][b])


def simulate_mixture(components: Iterable[Tuple[Fraction, ExtremalSpec, LocalRelabeling]]) -> CorrelationTable:
    """Shared randomness picks a component; the protocol plus a local relabeling runs it."""
    return mix((w, apply_relabeling(simulate_table(spec), r)) for w, spec, r in components)


@dataclass(frozen=True)
class SampleResult:
    runs: Tuple[ProtocolRun, ...]
    counts: Tuple[Tuple[int, int], Tuple[int, int]]  # counts[a][b]
    seed: int

    @property
    def trials(self) -> int:
        return len(self.runs)

    def frequencies(self) -> Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
        n = self.trials
        return tuple(tuple(Fraction(c, n) for c in row) for row in self.counts)

    def transcript(self) -> str:
        return "".join(run.line(i) + "\n" for i, run in enumerate(self.runs))


def simulate_sampled(spec: ExtremalSpec, x: int, y: int, trials: int, seed: int) -> SampleResult:
    """Run the protocol ``trials`` times with PR-box outputs drawn from a seeded PCG64.

    Each box draws Alice's output uniformly; Bob's output is fixed by the PR law.
    """
    if trials < 1:
        raise NsboxError("trials must be >= 1")
    r, s = box_inputs(spec, x, y)
    k = len(r)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    source = f"PCG64(seed={seed})"
    ai = rng.integers(0, 2, size=(trials, k), dtype=np.int64) if k else np.zeros((trials, 0), np.int64)
    rs = np.array([ri & si for ri, si in zip(r, s)], dtype=np.int64)
    bi = ai ^ rs
    alice_on, bob_on = x < spec.gx, y < spec.gy
    a_out = ai.sum(axis=1) % 2 if alice_on else np.zeros(trials, np.int64)
    b_out = bi.sum(axis=1) % 2 if bob_on else np.zeros(trials, np.int64)
    runs = []
    counts = [[0, 0], [0, 0]]
    for t in range(trials):
        boxes = tuple(BoxRecord(r[i], s[i], int(ai[t, i]), int(bi[t, i])) for i in range(k))
        a, b = int(a_out[t]), int(b_out[t])
        counts[a][b] += 1
        runs.append(ProtocolRun(spec, x, y, boxes, a, b, source))
    return SampleResult(tuple(runs), tuple(tuple(c) for c in counts), seed)
