from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from nsbox import ExtremalSpec, PR_SPEC, Scenario, barrett_box, pr_box, table_iii
from nsbox.errors import FormatError
from nsbox.io import (
    cell_text,
    decomposition_from_dict,
    decomposition_to_dict,
    dumps,
    loads,
    parse_rational,
    parse_spec_arg,
    rational_str,
    read_document,
    relabeling_from_dict,
    relabeling_to_dict,
    table_from_dict,
    table_text,
    table_to_dict,
)

from conftest import random_ns_table, random_relabeling


def test_rational_rendering():
    assert [rational_str(v) for v in (F(0), F(1), F(1, 2), F(-3, 4), F(10, 4))] == ["0", "1", "1/2", "-3/4", "5/2"]


def test_parse_lenient_and_strict():
    assert parse_rational("2/4") == F(1, 2)
    assert parse_rational("0.25") == F(1, 4)
    assert parse_rational(1) == 1
    assert parse_rational("1/2", strict=True) == F(1, 2)
    for bad in ("2/4", "0.5", "4/2", "01", 1):
        with pytest.raises(FormatError):
            parse_rational(bad, strict=True)
    for bad in ("x", "1/0", None, True, 0.5):
        with pytest.raises(FormatError):
            parse_rational(bad)


def test_pr_document_layout():
    d = table_to_dict(pr_box())
    assert d["p"]["1,1"] == [["0", "1/2"], ["1/2", "0"]]
    assert (d["dx"], d["dy"], d["da"], d["db"]) == (2, 2, 2, 2)


@pytest.mark.parametrize("t", [pr_box(), barrett_box(3), table_iii()])
def test_table_roundtrip(t):
    assert table_from_dict(loads(dumps(table_to_dict(t))), strict=True) == t


@given(st.randoms(use_true_random=False))
def test_table_roundtrip_random(r):
    t = random_ns_table(r, 3, 2)
    text = dumps(table_to_dict(t))
    assert table_from_dict(loads(text)) == t
    assert dumps(table_to_dict(table_from_dict(loads(text)))) == text


def test_table_errors():
    d = table_to_dict(pr_box())
    del d["p"]["0,0"]
    with pytest.raises(FormatError, match="missing"):
        table_from_dict(d)
    d = table_to_dict(pr_box())
    d["p"]["0,0"] = [["1/2"]]
    with pytest.raises(FormatError, match="grid"):
        table_from_dict(d)
    with pytest.raises(FormatError):
        table_from_dict({"dx": "2"})
    with pytest.raises(FormatError):
        table_from_dict([])


def test_loads_reports_position():
    with pytest.raises(FormatError, match="line 2 column"):
        loads('{\n  "a": }')


def test_read_document_missing(tmp_path):
    with pytest.raises(FormatError):
        read_document(str(tmp_path / "nope.json"))


def test_spec_arg_forms(tmp_path):
    assert parse_spec_arg("pr") == PR_SPEC
    spec = ExtremalSpec(3, 3, 3, 3, frozenset({(2, 2)}))
    assert parse_spec_arg(dumps(spec.to_dict())) == spec
    p = tmp_path / "spec.json"
    p.write_text(dumps(spec.to_dict()))
    assert parse_spec_arg(str(p)) == spec


def test_relabeling_roundtrip(rng):
    r = random_relabeling(rng, Scenario(3, 2))
    assert relabeling_from_dict(relabeling_to_dict(r)) == r
    with pytest.raises(FormatError):
        relabeling_from_dict({})


def test_decomposition_roundtrip():
    comps = [(F(1, 3), pr_box()), (F(2, 3), table_from_dict(table_to_dict(pr_box())))]
    d = decomposition_to_dict(comps, method="test")
    assert decomposition_from_dict(loads(dumps(d))) == comps
    with pytest.raises(FormatError):
        decomposition_from_dict({"components": []})


def test_text_renderings():
    assert cell_text(pr_box(), 1, 1) == "0 1/2 / 1/2 0"
    lines = table_text(pr_box()).splitlines()
    assert lines[0].startswith("scenario 2 2 2 2") and len(lines) == 5
