import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import state
from ghostwalk.dynamics import annihilation_distribution
from ghostwalk.errors import InvalidArgument
from ghostwalk.serialize import (
    dumps,
    fmt,
    graph_from_json,
    graph_to_json,
    matrix_from_json,
    matrix_to_json,
    parse_rational,
    state_from_json,
    state_to_json,
    table_records,
)
from ghostwalk.spacetime import path_generating_function


def test_fmt_always_has_denominator():
    assert fmt(1) == "1/1"
    assert fmt(Fraction(-6, 4)) == "-3/2"


@given(st.fractions())
def test_rational_roundtrip(x):
    assert parse_rational(fmt(x)) == x


@pytest.mark.parametrize("bad", ["1/0", "abc", "1.5", "2/-3"])
def test_parse_rational_rejects(bad):
    with pytest.raises(InvalidArgument):
        parse_rational(bad)


def test_explicit_graph_roundtrip():
    data = {
        "vertices": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
        "edges": [{"from": "a", "to": "b", "w": "1/3"}, {"from": "b", "to": "c", "w": "-2/1"}],
    }
    g = graph_from_json(data)
    assert path_generating_function(g, "a", "c") == Fraction(-2, 3)
    assert graph_to_json(g) == data


def test_lattice_shorthand():
    g = graph_from_json({"lattice": {"min": -1, "max": 1, "horizon": 1, "step_w": "1/2"}})
    assert len(g.vertices) == 6


def test_malformed_graph():
    with pytest.raises(InvalidArgument):
        graph_from_json({"vertices": [{"name": "a"}], "edges": []})


def test_state_roundtrip():
    s = state([0], [(2, -2)], t=2)
    data = state_to_json(s, lambda v: v[0])
    assert data == {"k": 1, "survivors": [0], "ghost_pairs": [[2, -2]]}
    assert state_from_json(data, lambda p: (p, 2)) == s


def test_state_k_mismatch():
    with pytest.raises(InvalidArgument):
        state_from_json({"k": 2, "survivors": [], "ghost_pairs": [[1, 1]]})


def test_matrix_roundtrip():
    rows = [[Fraction(0), Fraction(1, 2)], [Fraction(-1, 2), Fraction(0)]]
    assert matrix_from_json(json.loads(json.dumps(matrix_to_json(rows)))) == rows
    with pytest.raises(InvalidArgument):
        matrix_from_json({"dim": 2, "entries": ["1/1"]})


def test_table_records_and_stable_dump():
    table = annihilation_distribution((0, 2), 1)
    records = table_records(table, lambda v: v[0])
    assert sum(parse_rational(r["p"]) for r in records) == 1
    assert dumps(records) == dumps(table_records(annihilation_distribution((0, 2), 1), lambda v: v[0]))
    assert dumps({"x": Fraction(1, 3)}) == '{\n  "x": "1/3"\n}'
