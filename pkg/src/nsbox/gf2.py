"""Multilinear polynomials over GF(2) split into Alice and Bob variables.

Alice's input ``x`` is read in binary as bits ``x1, x2, ...`` (``x_j`` is
bit ``j-1``), and likewise Bob's ``y``.  A monomial is a pair of bitmasks
``(alice_mask, bob_mask)``; every coefficient is 1, so a polynomial is just
a set of monomials.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, FrozenSet, Iterable, Sequence, Tuple, Union

import numpy as np

Monomial = Tuple[int, int]


def n_bits(g: int) -> int:
    """Number of bits needed for inputs ``0..g-1``, i.e. ``ceil(log2 g)``."""
    if g < 1:
        raise ValueError("need at least one input")
    return (g - 1).bit_length()


def _mono_str(am: int, bm: int) -> str:
    parts = [f"x{j + 1}" for j in range(am.bit_length()) if am >> j & 1]
    parts += [f"y{j + 1}" for j in range(bm.bit_length()) if bm >> j & 1]
    return "*".join(parts) if parts else "1"


@dataclass(frozen=True)
class Gf2Polynomial:
    n_x: int
    n_y: int
    monomials: FrozenSet[Monomial]

    def __post_init__(self):
        object.__setattr__(self, "monomials", frozenset(self.monomials))
        for am, bm in self.monomials:
            if am >> self.n_x or bm >> self.n_y or am < 0 or bm < 0:
                raise ValueError(f"monomial {(am, bm)} uses variables beyond ({self.n_x}, {self.n_y})")

    @classmethod
    def zero(cls, n_x: int, n_y: int) -> "Gf2Polynomial":
        return cls(n_x, n_y, frozenset())

    def evaluate(self, x: int, y: int) -> int:
        v = 0
        for am, bm in self.monomials:
            if x & am == am and y & bm == bm:
                v ^= 1
        return v

    def __add__(self, other: "Gf2Polynomial") -> "Gf2Polynomial":
        if (self.n_x, self.n_y) != (other.n_x, other.n_y):
            raise ValueError("variable split mismatch")
        return Gf2Polynomial(self.n_x, self.n_y, self.monomials ^ other.monomials)

    def is_zero(self) -> bool:
        return not self.monomials

    def sorted_monomials(self):
        return sorted(self.monomials, key=lambda mb: (bin(mb[0]).count("1") + bin(mb[1]).count("1"), mb))

    def __str__(self) -> str:
        if not self.monomials:
            return "0"
        return " + ".join(_mono_str(am, bm) for am, bm in self.sorted_monomials())


TruthTable = Union[Sequence[Sequence[int]], Callable[[int, int], int]]


def _truth_value(F: TruthTable, x: int, y: int) -> int:
    if callable(F):
        return int(F(x, y)) & 1
    if x < len(F) and y < len(F[x]):
        return int(F[x][y]) & 1
    return 0  # zero padding beyond the supplied block


def multilinear_of(F: TruthTable, n_x: int, n_y: int) -> Gf2Polynomial:
    """Unique multilinear polynomial agreeing with ``F`` on the padded bit cube.

    ``F`` is a nested sequence ``F[x][y]`` (missing points count as 0) or a
    callable.  Coefficients come from the GF(2) Moebius transform: the
    coefficient of monomial S is the parity of F over all points below S.
    """
    nx, ny = 1 << n_x, 1 << n_y
    arr = np.zeros(nx * ny, dtype=np.uint8)
    for x in range(nx):
        for y in range(ny):
            arr[x | (y << n_x)] = _truth_value(F, x, y)
    n = n_x + n_y
    idx = np.arange(nx * ny)
    for j in range(n):
        hi = (idx >> j) & 1 == 1
        arr[hi] ^= arr[idx[hi] ^ (1 << j)]
    monos = {(int(z) & (nx - 1), int(z) >> n_x) for z in np.flatnonzero(arr)}
    return Gf2Polynomial(n_x, n_y, frozenset(monos))


@dataclass(frozen=True)
class FactoredForm:
    """``F(x, y) = sum_i P_i(x) Q_i(y)`` with ``Q_i`` the monomial of Bob mask ``i``.

    ``terms[i]`` is ``P_i``, an Alice-only polynomial; there is one slot for
    every Bob mask ``i`` in ``0 .. 2**n_y - 1`` (mask 0 is the constant 1).
    """

    n_x: int
    n_y: int
    terms: Tuple[Gf2Polynomial, ...]

    @property
    def slots(self) -> int:
        return len(self.terms)

    def alice_bit(self, i: int, x: int) -> int:
        return self.terms[i].evaluate(x, 0)

    @staticmethod
    def bob_bit(i: int, y: int) -> int:
        return int(y & i == i)

    def evaluate(self, x: int, y: int) -> int:
        v = 0
        for i in range(self.slots):
            v ^= self.alice_bit(i, x) & self.bob_bit(i, y)
        return v

    def expand(self) -> Gf2Polynomial:
        monos = set()
        for i, p in enumerate(self.terms):
            for am, _ in p.monomials:
                monos ^= {(am, i)}
        return Gf2Polynomial(self.n_x, self.n_y, frozenset(monos))

    def nonzero_terms(self) -> int:
        return sum(not p.is_zero() for p in self.terms)

    def __str__(self) -> str:
        parts = []
        for i, p in enumerate(self.terms):
            if p.is_zero():
                continue
            q = _mono_str(0, i)
            parts.append(f"({p})*{q}" if q != "1" else f"({p})")
        return " + ".join(parts) if parts else "0"


def factor(poly: Gf2Polynomial) -> FactoredForm:
    """Group monomials by their Bob mask."""
    groups = [set() for _ in range(1 << poly.n_y)]
    for am, bm in poly.monomials:
        groups[bm].add((am, 0))
    terms = tuple(Gf2Polynomial(poly.n_x, 0, frozenset(g)) for g in groups)
    return FactoredForm(poly.n_x, poly.n_y, terms)
