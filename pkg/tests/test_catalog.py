from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from nsbox import (
    BarrettSpec,
    ExtremalSpec,
    PR_SPEC,
    CorrelationTable,
    Scenario,
    apply_relabeling,
    barrett_box,
    canonical_form,
    deterministic_table,
    enumerate_classes,
    enumerate_specs,
    enumerate_vertices,
    from_xor_characterization,
    identify_spec,
    is_extremal,
    is_local,
    is_nonsignaling,
    marginals,
    pr_box,
    table2_box,
    validate,
)
from nsbox.catalog import NotCatalogBox, free_cells, spec_from_xor
from nsbox.errors import SpecError

from conftest import random_relabeling, specs_for

H = F(1, 2)


def restrict01(t):
    return CorrelationTable(Scenario(2, 2), t.entries[:2, :2])


# -- PR box ---------------------------------------------------------------------


def test_pr_cells():
    t = pr_box()
    c = t.cell(0, 0)
    assert (c[0, 0], c[1, 1], c[1, 0], c[0, 1]) == (H, H, 0, 0)
    c = t.cell(1, 1)
    assert (c[0, 1], c[1, 0], c[0, 0], c[1, 1]) == (H, H, 0, 0)


def test_pr_marginals_uniform():
    mg = marginals(pr_box())
    assert set(mg.l + mg.m) == {H}


# -- Barrett boxes -----------------------------------------------------------------


def test_barrett_k2_is_pr():
    assert barrett_box(BarrettSpec(2)) == pr_box()


def test_barrett_k3_cell_11():
    t = barrett_box(3)
    for a in range(3):
        for b in range(3):
            assert t[1, 1, a, b] == (F(1, 3) if (b - a) % 3 == 1 else 0)
    assert is_nonsignaling(t).ok and validate(t).ok


def test_barrett_k3_extremal():
    assert is_extremal(barrett_box(3)).extremal


def test_barrett_bad_k():
    with pytest.raises(SpecError):
        BarrettSpec(1)


# -- spec validation ---------------------------------------------------------------


@pytest.mark.parametrize(
    "args",
    [
        (3, 3, 1, 1, ()),  # g = 1 is neither local nor nonlocal
        (3, 3, 2, 0, ()),  # mixed zero / nonzero
        (2, 2, 3, 2, ()),  # g larger than d
        (3, 3, 3, 3, ((1, 1),)),  # fixed cell in Q
        (3, 3, 3, 3, ((0, 2),)),  # row/column 0 are fixed correlated
        (3, 3, 2, 2, ((2, 2),)),  # outside the free block
    ],
)
def test_spec_rejects_invalid(args):
    dx, dy, gx, gy, q = args
    with pytest.raises(SpecError):
        ExtremalSpec(dx, dy, gx, gy, frozenset(q))


def test_spec_dict_roundtrip():
    s = ExtremalSpec(4, 3, 3, 3, frozenset({(2, 2), (1, 2)}))
    assert ExtremalSpec.from_dict(s.to_dict()) == s
    assert s.to_dict()["anticorrelated_cells"] == [[1, 2], [2, 2]]


def test_free_cells_region():
    assert free_cells(2, 2) == []
    assert free_cells(3, 3) == [(1, 2), (2, 1), (2, 2)]


# -- table2_box ----------------------------------------------------------------------


def test_table2_pr_spec():
    assert table2_box(PR_SPEC) == pr_box()


def test_table2_local_is_zero_point():
    assert table2_box(ExtremalSpec(3, 3)) == deterministic_table(Scenario(3, 3), [0] * 3, [0] * 3)


def test_table2_all_correlated_33():
    t = table2_box(ExtremalSpec(3, 3, 3, 3))
    for x in range(3):
        for y in range(3):
            for a in range(2):
                for b in range(2):
                    want = H if (a ^ b) == int(x == 1 and y == 1) else 0
                    assert t[x, y, a, b] == want
    assert set(marginals(t).l + marginals(t).m) == {H}


def test_table2_mixed_blocks():
    t = table2_box(ExtremalSpec(3, 3, 2, 2))
    # nondeterministic Alice, deterministic Bob: b = 0, a uniform
    assert t.cell_grid(0, 2) == [[H, H], [0, 0]]
    # deterministic x deterministic: (0, 0)
    assert t.cell_grid(2, 2) == [[1, 0], [0, 0]]


@pytest.mark.parametrize("spec", specs_for(3, 3) + specs_for(3, 2) + specs_for(4, 3))
def test_every_catalog_box_is_valid_extremal(spec):
    t = table2_box(spec)
    assert validate(t).ok and is_nonsignaling(t).ok
    assert is_extremal(t).extremal
    mg = marginals(t)
    assert mg.l == tuple(H if x < spec.gx else F(1) for x in range(spec.dx))
    assert mg.m == tuple(H if y < spec.gy else F(1) for y in range(spec.dy))
    if not spec.is_local:
        assert restrict01(t) == pr_box()
        assert not is_local(t).local
    else:
        assert is_local(t).local


# -- xor characterization ----------------------------------------------------------------


def test_xor_empty_is_pr():
    assert from_xor_characterization(2, 2, set()) == pr_box()


def test_xor_q22():
    t = from_xor_characterization(3, 3, {(2, 2)})
    anti = {(x, y) for x in range(3) for y in range(3) if t[x, y, 0, 1] == H}
    assert anti == {(1, 1), (2, 2)}
    assert is_extremal(t).extremal


@pytest.mark.parametrize("q", [{(1, 1)}, {(3, 1)}, {(0, 1)}])
def test_xor_rejects_bad_q(q):
    with pytest.raises(SpecError):
        from_xor_characterization(3, 3, q)


@given(st.sets(st.sampled_from(free_cells(4, 3))))
def test_xor_matches_table2(q):
    assert from_xor_characterization(4, 3, q) == table2_box(spec_from_xor(4, 3, q))


# -- classes ---------------------------------------------------------------------------------


def test_classes_small():
    assert len(enumerate_classes(1, 1)) == 1
    cls = enumerate_classes(2, 2)
    assert [s.is_local for s in cls] == [True, False] and cls[1] == PR_SPEC


def test_classes_match_vertex_oracle_32():
    oracle = {canonical_form(v)[0] for v in enumerate_vertices(Scenario(3, 2))}
    catalog = {canonical_form(table2_box(s))[0] for s in enumerate_classes(3, 2)}
    assert oracle == catalog


# -- identify_spec ---------------------------------------------------------------------------


@given(st.randoms(use_true_random=False), st.sampled_from([(2, 2), (3, 3), (4, 3), (3, 4)]))
def test_identify_spec_recovers_relabeling(r, dims):
    spec = r.choice(specs_for(*dims))
    t = apply_relabeling(table2_box(spec), random_relabeling(r, spec.scenario))
    found, rl = identify_spec(t)
    assert apply_relabeling(table2_box(found), rl) == t
    if dims in ((2, 2), (3, 3)):
        assert canonical_form(table2_box(found))[0] == canonical_form(t)[0]


def test_identify_rejects_mixture():
    from nsbox import mix, uniform_table

    with pytest.raises(NotCatalogBox):
        identify_spec(mix([(H, pr_box()), (H, uniform_table(Scenario(2, 2)))]))
