"""Correlation tables from quantum states and POVMs (Born rule).

``P(a, b | x, y) = tr[(A^x_a kron B^y_b) rho]`` is computed in double
precision, then turned into an exact nonsignaling table: each probability
is rounded to a rational with bounded denominator, and the rounded vector is
projected exactly (in Fractions) onto the affine hull of the nonsignaling
polytope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .appendix import Table2Decomposition, decompose_to_table2
from .core import CorrelationTable, Scenario, is_nonsignaling, validate
from .errors import FormatError, NsboxError
from .interconversion import box_count
from .polytope import LocalityResult, affine_parametrization, is_local

TOL = 1e-12
PSD_TOL = 1e-10
DEFAULT_MAX_DENOMINATOR = 10**6


class QuantumError(NsboxError):
    pass


def _check_hermitian(m: np.ndarray, what: str, tol: float):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise QuantumError(f"{what} is not a square matrix")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise QuantumError(f"{what} is not Hermitian")


def _check_psd(m: np.ndarray, what: str, tol: float = PSD_TOL):
    low = float(np.linalg.eigvalsh(m).min())
    if low < -tol:
        raise QuantumError(f"{what} is not positive semidefinite (smallest eigenvalue {low:.3e})")


@dataclass
class QuantumScenario:
    """State on ``C^dA kron C^dB`` with POVMs ``alice_povms[x][a]``, ``bob_povms[y][b]``."""

    state: np.ndarray
    alice_povms: List[List[np.ndarray]]
    bob_povms: List[List[np.ndarray]]
    name: str = ""

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=complex)
        self.alice_povms = [[np.asarray(e, dtype=complex) for e in povm] for povm in self.alice_povms]
        self.bob_povms = [[np.asarray(e, dtype=complex) for e in povm] for povm in self.bob_povms]

    @property
    def dims(self) -> Tuple[int, int]:
        return self.alice_povms[0][0].shape[0], self.bob_povms[0][0].shape[0]

    @property
    def scenario(self) -> Scenario:
        das = {len(p) for p in self.alice_povms}
        dbs = {len(p) for p in self.bob_povms}
        if len(das) != 1 or len(dbs) != 1:
            raise QuantumError("all inputs of a party need the same number of outcomes")
        return Scenario(len(self.alice_povms), len(self.bob_povms), das.pop(), dbs.pop())

    def check(self, tol: float = TOL) -> None:
        if not self.alice_povms or not self.bob_povms:
            raise QuantumError("each party needs at least one measurement")
        dA, dB = self.dims
        rho = self.state
        if rho.shape != (dA * dB, dA * dB):
            raise QuantumError(f"state has shape {rho.shape}, expected {(dA * dB, dA * dB)}")
        _check_hermitian(rho, "state", tol)
        if abs(np.trace(rho) - 1) > tol:
            raise QuantumError("state does not have unit trace")
        _check_psd(rho, "state")
        for who, povms, d in (("alice", self.alice_povms, dA), ("bob", self.bob_povms, dB)):
            for x, povm in enumerate(povms):
                total = np.zeros((d, d), dtype=complex)
                for a, e in enumerate(povm):
                    what = f"{who} POVM element ({x},{a})"
                    if e.shape != (d, d):
                        raise QuantumError(f"{what} has shape {e.shape}, expected {(d, d)}")
                    _check_hermitian(e, what, tol)
                    _check_psd(e, what)
                    total = total + e
                if np.max(np.abs(total - np.eye(d))) > tol:
                    raise QuantumError(f"{who} POVM {x} does not sum to the identity")
        self.scenario  # outcome-count consistency

    def to_dict(self) -> dict:
        def enc(m):
            return [[[float(v.real), float(v.imag)] for v in row] for row in m]

        return {
            "name": self.name,
            "state": enc(self.state),
            "alice_povms": [[enc(e) for e in p] for p in self.alice_povms],
            "bob_povms": [[enc(e) for e in p] for p in self.bob_povms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuantumScenario":
        def dec(m):
            return np.array([[complex(re, im) for re, im in row] for row in m], dtype=complex)

        try:
            return cls(
                dec(d["state"]),
                [[dec(e) for e in p] for p in d["alice_povms"]],
                [[dec(e) for e in p] for p in d["bob_povms"]],
                d.get("name", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed quantum scenario: {exc}") from exc


def born_probabilities(qs: QuantumScenario) -> np.ndarray:
    """Float array ``P[x, y, a, b]`` straight from the Born rule."""
    qs.check()
    s = qs.scenario
    P = np.empty(s.shape)
    for x, A in enumerate(qs.alice_povms):
        for y, B in enumerate(qs.bob_povms):
            for a, Ea in enumerate(A):
                for b, Eb in enumerate(B):
                    P[x, y, a, b] = float(np.real(np.trace(np.kron(Ea, Eb) @ qs.state)))
    return P


def nonsignaling_residual(P: np.ndarray) -> float:
    """Largest difference between a party's marginal under two partner inputs."""
    alice = P.sum(axis=3)  # [x, y, a]
    bob = P.sum(axis=2)  # [x, y, b]
    r1 = np.max(np.abs(alice - alice[:, :1, :]))
    r2 = np.max(np.abs(bob - bob[:1, :, :]))
    return float(max(r1, r2))


def rationalize(P: np.ndarray, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> CorrelationTable:
    """Exact nonsignaling table closest (least squares) to rounded probabilities.

    Steps: least-squares projection of the float vector onto the
    nonsignaling affine hull, rounding every entry with
    ``Fraction.limit_denominator``, then an exact least-squares re-projection
    of the rounded vector (normal equations solved in Fractions).  A
    negative entry smaller than ``1/max_denominator`` in magnitude is
    repaired by mixing in the least uniform noise that zeroes it; larger
    negatives raise.  The result satisfies normalization and nonsignaling
    exactly.
    """
    s = Scenario(*P.shape)
    p0, basis = affine_parametrization(s)
    B = np.array([[float(v) for v in col] for col in basis]).T  # n_vars x dim
    f0 = np.array([float(v) for v in p0])
    flat = P.reshape(-1)
    t, *_ = np.linalg.lstsq(B, flat - f0, rcond=None)
    proj = f0 + B @ t
    q = [Fraction(float(v)).limit_denominator(max_denominator) for v in proj]
    # exact re-projection: solve (B^T B) t = B^T (q - p0)
    diff = [qi - pi for qi, pi in zip(q, p0)]
    gram = [[sum((u * v for u, v in zip(bi, bj)), Fraction(0)) for bj in basis] for bi in basis]
    rhs = [sum((u * v for u, v in zip(bi, diff)), Fraction(0)) for bi in basis]
    tt = linalg.solve_square(gram, rhs) if basis else []
    exact = list(p0)
    for tj, bj in zip(tt, basis):
        if tj:
            exact = [e + tj * v for e, v in zip(exact, bj)]
    # rounding can push a true zero slightly negative; mix in the least uniform
    # noise that repairs it, provided the violation is below the rounding scale
    worst = min(exact)
    if Fraction(-1, max_denominator) < worst < 0:
        u = Fraction(1, s.da * s.db)
        eps = -worst / (u - worst)
        exact = [(1 - eps) * e + eps * u for e in exact]
    table = CorrelationTable(s, np.array(exact, dtype=object).reshape(s.shape))
    rep = validate(table)
    if not rep.ok:
        raise QuantumError(
            f"rationalized table is not a valid distribution ({rep.violations[0]}); "
            "raise max_denominator"
        )
    if not is_nonsignaling(table).ok:  # pragma: no cover - exact projection guarantees this
        raise AssertionError("projection left the table signaling")
    return table


def born_table(qs: QuantumScenario, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> CorrelationTable:
    return rationalize(born_probabilities(qs), max_denominator)


def chsh_value(P) -> float:
    """Largest ``|S|`` over the four CHSH variants on inputs {0,1} x {0,1}.

    ``S = E00 + E01 + E10 + E11 - 2 E_{xy}`` for the cell ``(x, y)`` carrying
    the minus sign, with ``E_{xy} = sum_ab (-1)^(a+b) P(a,b|x,y)``.
    Works on float arrays and on exact tables (returns a float either way).
    """
    if isinstance(P, CorrelationTable):
        if not P.scenario.binary or P.scenario.dx < 2 or P.scenario.dy < 2:
            raise NsboxError("CHSH needs binary outputs and two inputs per side")
        P = np.array([[[[float(P[x, y, a, b]) for b in range(2)] for a in range(2)]
                       for y in range(P.scenario.dy)] for x in range(P.scenario.dx)])
    E = [[P[x, y, 0, 0] + P[x, y, 1, 1] - P[x, y, 0, 1] - P[x, y, 1, 0] for y in range(2)] for x in range(2)]
    total = sum(E[x][y] for x in range(2) for y in range(2))
    return float(max(abs(total - 2 * E[x][y]) for x in range(2) for y in range(2)))


def chsh_exact(table: CorrelationTable) -> Fraction:
    """Exact version of :func:`chsh_value` for rational tables."""
    E = [[table[x, y, 0, 0] + table[x, y, 1, 1] - table[x, y, 0, 1] - table[x, y, 1, 0] for y in range(2)]
         for x in range(2)]
    total = sum(E[x][y] for x in range(2) for y in range(2))
    return max(abs(total - 2 * E[x][y]) for x in range(2) for y in range(2))


# ---------------------------------------------------------------------------
# presets

I2 = np.eye(2, dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def plane_measurement(theta: float) -> List[np.ndarray]:
    """Projective qubit measurement along ``cos(theta) Z + sin(theta) X``; outcome 0 is +1."""
    obs = math.cos(theta) * Z + math.sin(theta) * X
    return [(I2 + obs) / 2, (I2 - obs) / 2]


def _pure(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


SINGLET = _pure([0, 1, -1, 0])
CHSH_ALICE = (0.0, math.pi / 2)
CHSH_BOB = (math.pi / 4, 3 * math.pi / 4)
PRESETS = ("singlet_chsh", "product_plus", "mixed_uniform", "singlet_angles")


def singlet_angles(alice: Sequence[float], bob: Sequence[float]) -> QuantumScenario:
    return QuantumScenario(
        SINGLET,
        [plane_measurement(t) for t in alice],
        [plane_measurement(t) for t in bob],
        f"singlet_angles({list(alice)};{list(bob)})",
    )


def preset(name: str, alice_angles: Optional[Sequence[float]] = None,
           bob_angles: Optional[Sequence[float]] = None) -> QuantumScenario:
    """Named scenarios.

    * ``singlet_chsh``: singlet, Alice at angles 0, pi/2, Bob at pi/4, 3pi/4.
    * ``product_plus``: ``|+>|+>``, both measure Z (input 0) and X (input 1).
    * ``mixed_uniform``: ``I/4`` with the CHSH settings.
    * ``singlet_angles``: singlet with caller-supplied Bloch-plane angles.
    """
    if name == "singlet_chsh":
        qs = singlet_angles(CHSH_ALICE, CHSH_BOB)
        qs.name = name
        return qs
    if name == "product_plus":
        plus = _pure([1, 1])
        zx = [plane_measurement(0.0), plane_measurement(math.pi / 2)]
        return QuantumScenario(np.kron(plus, plus), zx, [m[:] for m in zx], name)
    if name == "mixed_uniform":
        return QuantumScenario(
            np.eye(4, dtype=complex) / 4,
            [plane_measurement(t) for t in CHSH_ALICE],
            [plane_measurement(t) for t in CHSH_BOB],
            name,
        )
    if name == "singlet_angles":
        if alice_angles is None or bob_angles is None:
            raise QuantumError("singlet_angles needs alice and bob angle lists")
        return singlet_angles(alice_angles, bob_angles)
    raise QuantumError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


# ---------------------------------------------------------------------------
# pipeline report


@dataclass
class QuantumReport:
    name: str
    table: CorrelationTable
    chsh: Optional[float]  # float CHSH before rationalization (None if not 2x2-able)
    ns_residual: float
    locality: LocalityResult
    decomposition: Optional[Table2Decomposition] = None
    nonlocal_weight: Fraction = Fraction(0)
    box_counts: Tuple[Tuple[Fraction, int, int], ...] = ()  # (weight, slots, nonzero) per nonlocal component

    @property
    def local(self) -> bool:
        return self.locality.local

    @property
    def pr_boxes_per_run(self) -> int:
        """PR boxes that always suffice: the largest slot count among nonlocal components."""
        return max((slots for _, slots, _ in self.box_counts), default=0)

    def lines(self) -> List[str]:
        out = [f"scenario: {self.name or 'custom'}"]
        if self.chsh is not None:
            out.append(f"chsh (float): {self.chsh:.12f}")
            out.append(f"chsh (rationalized): {float(chsh_exact(self.table)):.12f}")
        out.append(f"nonsignaling residual (float): {self.ns_residual:.3e}")
        out.append(f"local: {'yes' if self.local else 'no'}")
        if self.decomposition is not None:
            out.append(f"components: {len(self.decomposition.components)}")
            out.append(f"nonlocal weight: {self.nonlocal_weight}")
            out.append(f"pr boxes per run: {self.pr_boxes_per_run}")
        else:
            out.append("pr boxes per run: 0")
        return out


def quantum_to_prbox_report(qs: QuantumScenario, max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> QuantumReport:
    """Born rule -> exact table -> locality test -> (if nonlocal) decomposition and box counts."""
    s = qs.scenario
    if not s.binary:
        raise QuantumError("the PR-box report covers two-outcome measurements only")
    P = born_probabilities(qs)
    chsh = chsh_value(P) if s.dx >= 2 and s.dy >= 2 else None
    table = rationalize(P, max_denominator)
    loc = is_local(table)
    rep = QuantumReport(qs.name, table, chsh, nonsignaling_residual(P), loc)
    if not loc.local:
        dec = decompose_to_table2(table)
        rep.decomposition = dec
        rep.nonlocal_weight = dec.nonlocal_weight()
        counts = []
        for c in dec.components:
            if not c.spec.is_local:
                bc = box_count(c.spec)
                counts.append((c.weight, bc.slots, bc.nonzero))
        rep.box_counts = tuple(counts)
    return rep
