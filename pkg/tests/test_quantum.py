import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsbox import Scenario, is_local, is_nonsignaling, uniform_table, validate
from nsbox.errors import FormatError
from nsbox.quantum import (
    PRESETS,
    SINGLET,
    QuantumError,
    QuantumScenario,
    born_probabilities,
    born_table,
    chsh_exact,
    chsh_value,
    nonsignaling_residual,
    plane_measurement,
    preset,
    quantum_to_prbox_report,
    rationalize,
)


def _pure(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


# -- scenario checks ----------------------------------------------------------------


@pytest.mark.parametrize("name", ["singlet_chsh", "product_plus", "mixed_uniform"])
def test_presets_are_valid(name):
    qs = preset(name)
    qs.check()
    for povms in (qs.alice_povms, qs.bob_povms):
        for povm in povms:
            assert np.max(np.abs(sum(povm) - np.eye(2))) < 1e-12


def test_preset_unknown_and_angles():
    with pytest.raises(QuantumError):
        preset("nope")
    with pytest.raises(QuantumError):
        preset("singlet_angles")
    qs = preset("singlet_angles", [0.0, 1.0, 2.0], [0.5])
    assert qs.scenario == Scenario(3, 1)


def test_bad_povm_rejected():
    qs = QuantumScenario(SINGLET, [[np.eye(2), np.eye(2)]], [plane_measurement(0.0)])
    with pytest.raises(QuantumError, match="identity"):
        qs.check()


def test_bad_state_rejected():
    rho = np.diag([1.5, -0.5, 0, 0]).astype(complex)
    qs = QuantumScenario(rho, [plane_measurement(0.0)], [plane_measurement(0.0)])
    with pytest.raises(QuantumError, match="positive"):
        qs.check()


def test_dict_roundtrip_and_format_error():
    qs = preset("singlet_chsh")
    back = QuantumScenario.from_dict(qs.to_dict())
    assert np.allclose(back.state, qs.state) and back.name == qs.name
    with pytest.raises(FormatError):
        QuantumScenario.from_dict({"state": []})


# -- Born rule ------------------------------------------------------------------------


@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_product_state_factorizes(t1, t2, t3, t4):
    psiA, psiB = _pure([math.cos(t1), math.sin(t1)]), _pure([math.cos(t2), 1j * math.sin(t2)])
    A, B = [plane_measurement(t3)], [plane_measurement(t4)]
    P = born_probabilities(QuantumScenario(np.kron(psiA, psiB), A, B))
    for a in range(2):
        for b in range(2):
            pa = np.real(np.trace(A[0][a] @ psiA))
            pb = np.real(np.trace(B[0][b] @ psiB))
            assert abs(P[0, 0, a, b] - pa * pb) < 1e-12


def test_mixed_uniform_gives_uniform_table():
    assert born_table(preset("mixed_uniform")) == uniform_table(Scenario(2, 2))


def test_singlet_chsh_value():
    P = born_probabilities(preset("singlet_chsh"))
    assert abs(chsh_value(P) - 2 * math.sqrt(2)) < 1e-9
    assert nonsignaling_residual(P) < 1e-12


@given(st.lists(st.floats(0, 2 * math.pi), min_size=1, max_size=3),
       st.lists(st.floats(0, 2 * math.pi), min_size=1, max_size=3))
def test_born_residual_and_rationalized_table_exact(alice, bob):
    qs = preset("singlet_angles", alice, bob)
    P = born_probabilities(qs)
    assert nonsignaling_residual(P) < 1e-12
    t = rationalize(P)
    assert validate(t).ok and is_nonsignaling(t).ok
    assert max(abs(float(t[i]) - P[i]) for i in np.ndindex(P.shape)) < 1e-5


def test_rationalize_keeps_exact_values():
    P = np.full((2, 2, 2, 2), 0.25)
    assert rationalize(P) == uniform_table(Scenario(2, 2))


def test_chsh_exact_on_table():
    from nsbox import pr_box

    assert chsh_exact(pr_box()) == 4
    assert chsh_exact(uniform_table(Scenario(2, 2))) == 0
    assert chsh_value(pr_box()) == 4.0


# -- pipeline report -----------------------------------------------------------------------


def test_report_product_plus_local():
    rep = quantum_to_prbox_report(preset("product_plus"))
    assert rep.local and rep.pr_boxes_per_run == 0
    assert "local: yes" in rep.lines()


def test_report_mixed_uniform_local():
    assert quantum_to_prbox_report(preset("mixed_uniform")).local


def test_report_singlet_nonlocal():
    rep = quantum_to_prbox_report(preset("singlet_chsh"))
    assert not rep.local
    assert not is_local(rep.table).local
    dec = rep.decomposition
    assert dec.reconstruct() == rep.table
    assert rep.nonlocal_weight > 0
    assert rep.pr_boxes_per_run >= 2
    assert any(line.startswith("nonlocal weight:") for line in rep.lines())


def test_report_rejects_three_outcomes():
    tri = [np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex), np.zeros((2, 2), complex)]
    qs = QuantumScenario(_pure([1, 0, 0, 0]), [tri], [plane_measurement(0.0) + [np.zeros((2, 2), complex)]])
    with pytest.raises(QuantumError):
        quantum_to_prbox_report(qs)


def test_rationalize_repairs_rounding_at_true_zero():
    # angle gap of 2*pi makes some probabilities exactly zero; rounding once left -1/4586806388816
    qs = preset("singlet_angles", [0.0], [0.0, 5.283185307179586])
    P = born_probabilities(qs)
    t = rationalize(P)
    assert validate(t).ok and is_nonsignaling(t).ok
    assert max(abs(float(t[i]) - P[i]) for i in np.ndindex(P.shape)) < 1e-5
