import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsbox import (
    CorrelationTable,
    LocalRelabeling,
    Scenario,
    ShapeError,
    SignalingError,
    apply_relabeling,
    canonical_form,
    deterministic_table,
    equivalent,
    is_local,
    is_nonsignaling,
    marginals,
    mix,
    pr_box,
    table_iii,
    uniform_table,
    validate,
)
from nsbox.core import BudgetExceeded, orbit_size

from conftest import random_ns_table, random_relabeling

S22 = Scenario(2, 2)


def replace_cell(table, x, y, grid_ab):
    p = table.entries.copy()
    p.flags.writeable = True
    for a in range(2):
        for b in range(2):
            p[x, y, a, b] = F(grid_ab[a][b])
    return CorrelationTable(table.scenario, p)


def all_correlated():
    return CorrelationTable.from_function(S22, lambda x, y, a, b: F(1, 2) if a == b else F(0))


# -- scenario / table basics -------------------------------------------------


def test_scenario_rejects_nonpositive():
    with pytest.raises(ShapeError):
        Scenario(0, 2)


def test_table_shape_mismatch_is_structural():
    with pytest.raises(ShapeError):
        CorrelationTable(S22, np.zeros((2, 2, 2), dtype=object))


def test_entries_are_exact_and_read_only():
    t = pr_box()
    assert all(isinstance(v, F) for v in t.flat())
    with pytest.raises(ValueError):
        t.entries[0, 0, 0, 0] = F(1)


def test_cell_layout_rows_b_columns_a():
    t = pr_box()
    assert t.cell_grid(1, 1) == [[0, F(1, 2)], [F(1, 2), 0]]


# -- validate -----------------------------------------------------------------


def test_validate_pr_ok():
    assert validate(pr_box()).ok


def test_validate_negative_entry():
    t = replace_cell(pr_box(), 0, 1, [[F(3, 4), F(0)], [F(-1, 4), F(1, 2)]])
    rep = validate(t)
    assert not rep.ok
    assert [(v.kind, v.index, v.value) for v in rep.violations] == [("positivity", (0, 1, 1, 0), F(-1, 4))]


def test_validate_normalization():
    t = replace_cell(pr_box(), 1, 0, [[F(1, 2), F(0)], [F(0), F(2, 5)]])
    rep = validate(t)
    assert [(v.kind, v.index, v.value) for v in rep.violations] == [("normalization", (1, 0), F(9, 10))]


# -- nonsignaling ---------------------------------------------------------------


def test_pr_is_nonsignaling():
    assert is_nonsignaling(pr_box()).ok


def test_pr_with_correlated_11_cell_still_nonsignaling():
    t = replace_cell(pr_box(), 1, 1, [[F(1, 2), 0], [0, F(1, 2)]])
    assert t == all_correlated()
    assert is_nonsignaling(t).ok


def test_signaling_table_reports_tuple():
    # Bob's b=0 at y=0 is 1 under x=0 and 1/2 under x=1
    t = CorrelationTable.from_function(
        S22,
        lambda x, y, a, b: (F(int(a == 0 and b == 0)) if (x, y) == (0, 0) else F(1, 4)),
    )
    rep = is_nonsignaling(t)
    assert not rep.ok
    assert ("bob", 0, 0, 1, 0) in rep.violations
    with pytest.raises(SignalingError):
        marginals(t)


def test_table_iii_nonsignaling():
    assert validate(table_iii()).ok
    assert is_nonsignaling(table_iii()).ok


# -- marginals ------------------------------------------------------------------


def test_marginals_pr():
    mg = marginals(pr_box())
    assert mg.l == (F(1, 2), F(1, 2)) and mg.m == (F(1, 2), F(1, 2))


def test_marginals_deterministic_zero_point():
    mg = marginals(deterministic_table(Scenario(3, 2), [0, 0, 0], [0, 0]))
    assert mg.l == (1, 1, 1) and mg.m == (1, 1)


def test_marginals_table_iii_first_entry():
    assert marginals(table_iii()).alice[0][0] == F(1, 2)


def test_marginals_nonbinary_have_no_aliases():
    from nsbox import barrett_box

    mg = marginals(barrett_box(3))
    assert mg.l is None and mg.alice[0] == (F(1, 3),) * 3


# -- relabelings ----------------------------------------------------------------


def test_identity_relabeling():
    assert apply_relabeling(pr_box(), LocalRelabeling.identity(S22)) == pr_box()


def test_flip_bob_outputs_at_y1():
    r = LocalRelabeling((0, 1), (0, 1), ((0, 1), (0, 1)), ((0, 1), (1, 0)))
    t = apply_relabeling(pr_box(), r)
    # cell (1,1) is now correlated; cell (0,1) anticorrelated; row y=0 untouched
    assert t.cell_grid(1, 1) == [[F(1, 2), 0], [0, F(1, 2)]]
    assert t.cell_grid(0, 1) == [[0, F(1, 2)], [F(1, 2), 0]]
    assert t.cell_grid(0, 0) == pr_box().cell_grid(0, 0)


def test_relabeling_dimension_mismatch():
    with pytest.raises(ShapeError):
        apply_relabeling(pr_box(), LocalRelabeling.identity(Scenario(3, 2)))


@given(st.randoms(use_true_random=False))
def test_relabeling_inverse_and_composition(r):
    s = Scenario(3, 2)
    t = random_ns_table(r, 3, 2)
    a, b = random_relabeling(r, s), random_relabeling(r, s)
    assert apply_relabeling(apply_relabeling(t, a), a.inverse()) == t
    assert apply_relabeling(t, a.then(b)) == apply_relabeling(apply_relabeling(t, a), b)


@given(st.randoms(use_true_random=False))
def test_relabeling_preserves_validity_nonsignaling_locality(r):
    t = random_ns_table(r, 2, 2)
    u = apply_relabeling(t, random_relabeling(r, S22))
    assert validate(u).ok and is_nonsignaling(u).ok
    assert is_local(u).local == is_local(t).local


@given(st.randoms(use_true_random=False))
def test_marginals_are_covariant(r):
    s = Scenario(3, 3)
    t = random_ns_table(r, 3, 3)
    rl = random_relabeling(r, s)
    mt, mu = marginals(t), marginals(apply_relabeling(t, rl))
    for x in range(3):
        for a in range(2):
            assert mu.alice[rl.alice_input_perm[x]][rl.alice_output_perms[x][a]] == mt.alice[x][a]
    for y in range(3):
        for b in range(2):
            assert mu.bob[rl.bob_input_perm[y]][rl.bob_output_perms[y][b]] == mt.bob[y][b]


# -- canonical form -------------------------------------------------------------


def test_canonical_pr_input_swap():
    swapped = apply_relabeling(pr_box(), LocalRelabeling((1, 0), (1, 0), ((0, 1),) * 2, ((0, 1),) * 2))
    assert canonical_form(swapped)[0] == canonical_form(pr_box())[0]


def test_canonical_pr_vs_all_correlated():
    assert canonical_form(pr_box())[0] != canonical_form(all_correlated())[0]


def test_canonical_deterministic_is_zero_point():
    s = Scenario(3, 2)
    zero = deterministic_table(s, [0, 0, 0], [0, 0])
    for f in ([1, 0, 1], [1, 1, 1], [0, 1, 0]):
        for g in ([1, 0], [0, 1]):
            assert canonical_form(deterministic_table(s, f, g))[0] == zero


@given(st.randoms(use_true_random=False))
def test_canonical_relabeling_and_idempotence(r):
    t = random_ns_table(r, 2, 3)
    c, rl = canonical_form(t)
    assert apply_relabeling(t, rl) == c
    assert canonical_form(c)[0] == c
    u = apply_relabeling(t, random_relabeling(r, t.scenario))
    assert canonical_form(u)[0] == c and equivalent(t, u)


def test_canonical_budget():
    s = Scenario(3, 3)
    assert orbit_size(s) == 6 * 6 * 2**3 * 2**3
    with pytest.raises(BudgetExceeded):
        canonical_form(uniform_table(s), budget=100)


def test_mix_is_exact():
    t = mix([(F(1, 3), pr_box()), (F(2, 3), uniform_table(S22))])
    assert t[1, 1, 0, 1] == F(1, 3) * F(1, 2) + F(2, 3) * F(1, 4)
