from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from empchoice.errors import DomainError, ParseError, SchemaError, ValidationError
from empchoice.protocol import (ConsequenceSpace, Direction, EmpiricalSample, Protocol,
                                load_protocol, load_protocol_json, sample_of, save_protocol,
                                save_protocol_json, sub_protocol)


def test_table1_counts(table1):
    assert table1.actions == ("Red", "Blue", "Green", "Yellow", "Black")
    assert tuple(table1.counts.values()) == (5, 5, 5, 5, 5)
    assert table1.n_entries == 25


def test_prompting_counts_and_directions(prompting):
    assert prompting.counts == {"neutral": 11, "polite": 14, "inpolite": 10}
    assert prompting.space.directions == (Direction.MINIMIZE, Direction.MAXIMIZE)
    assert prompting.space.names == ("PPL", "Coh")


def test_empty_file_is_parse_error(tmp_path):
    f = tmp_path / "empty.csv"
    f.write_text("")
    with pytest.raises(ParseError):
        load_protocol(f)


def test_header_only_is_parse_error(tmp_path):
    f = tmp_path / "h.csv"
    f.write_text("action,x\n")
    with pytest.raises(ParseError):
        load_protocol(f)


def test_malformed_row_names_line(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("action,x\na,1\nb,oops\n")
    with pytest.raises(ParseError, match="line 3"):
        load_protocol(f)


def test_wrong_field_count_names_line(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("action,x\na,1,2\n")
    with pytest.raises(ParseError, match="line 2"):
        load_protocol(f)


def test_bad_header(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("who,x\na,1\n")
    with pytest.raises(ParseError, match="line 1"):
        load_protocol(f)


def test_dimension_mismatch_is_schema_error(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("action,x\na,1\n")
    with pytest.raises(SchemaError):
        load_protocol(f, space=ConsequenceSpace(2))


def test_declared_action_without_trials(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("action,x\na,1\n")
    (tmp_path / "p.csv.json").write_text(json.dumps({"columns": ["x"], "directions": ["max"],
                                                     "actions": ["a", "b"]}))
    with pytest.raises(ValidationError):
        load_protocol(f)


def test_directions_from_flags(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("action,x,y\na,1,2\n")
    p = load_protocol(f, directions={"x": "min"})
    assert p.space.directions == (Direction.MINIMIZE, Direction.MAXIMIZE)
    with pytest.raises(SchemaError):
        load_protocol(f, directions={"z": "min"})


def test_non_finite_rejected(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("action,x\na,nan\n")
    with pytest.raises(ParseError):
        load_protocol(f)
    with pytest.raises(ValidationError):
        Protocol(ConsequenceSpace(1), (("a", (float("inf"),)),))


def test_space_invariants():
    with pytest.raises(SchemaError):
        ConsequenceSpace(0)
    with pytest.raises(SchemaError):
        ConsequenceSpace(2, ("max",))
    with pytest.raises(SchemaError):
        ConsequenceSpace(1, ("sideways",))


def test_sub_protocol_examples(table1):
    red = sub_protocol(table1, ["Red"])
    assert [c[0] for _, c in red.entries] == [3, 1, 6, 2, 5]
    assert sub_protocol(table1).entries == table1.entries
    assert len(sub_protocol(table1, ["Red", "Black"]).entries) == 10
    with pytest.raises(DomainError):
        sub_protocol(table1, [])
    with pytest.raises(DomainError):
        sub_protocol(table1, ["Purple"])


def test_sample_of_examples(table1, prompting):
    assert sample_of(table1, "Red").points[:, 0].tolist() == [3, 1, 6, 2, 5]
    neutral = sample_of(prompting, "neutral")
    assert neutral.n == 11
    assert tuple(neutral.points[0]) == (18, 0.95)
    one = Protocol(ConsequenceSpace(1), (("a", (1.0,)), ("b", (2.0,)), ("b", (3.0,))))
    assert sample_of(one, "a").n == 1
    with pytest.raises(DomainError):
        sample_of(table1, "Purple")
    with pytest.raises(DomainError):
        sub_protocol(table1, ["Red"]).sample_of("Blue")


def test_minimize_columns_are_negated(prompting):
    s = sample_of(prompting, "neutral")
    assert np.array_equal(s.normalized[:, 0], -s.points[:, 0])
    assert np.array_equal(s.normalized[:, 1], s.points[:, 1])


def test_empirical_sample_needs_points():
    with pytest.raises(ValidationError):
        EmpiricalSample(ConsequenceSpace(1), np.empty((0, 1)))


_values = st.floats(allow_nan=False, allow_infinity=False, width=64)


@st.composite
def protocols(draw, max_dim=3):
    dim = draw(st.integers(1, max_dim))
    n_actions = draw(st.integers(1, 4))
    actions = [f"a{k}" for k in range(n_actions)]
    entries = [(a, tuple(draw(st.lists(_values, min_size=dim, max_size=dim))))
               for a in actions]
    extra = draw(st.lists(st.tuples(st.sampled_from(actions),
                                    st.lists(_values, min_size=dim, max_size=dim)), max_size=10))
    entries += [(a, tuple(c)) for a, c in extra]
    order = draw(st.permutations(range(len(entries))))
    dirs = tuple(draw(st.lists(st.sampled_from(["max", "min"]), min_size=dim, max_size=dim)))
    return Protocol(ConsequenceSpace(dim, dirs), tuple(entries[k] for k in order))


@settings(max_examples=100)
@given(protocols())
def test_csv_round_trip_is_bit_exact(tmp_path_factory, p):
    path = tmp_path_factory.mktemp("rt") / "p.csv"
    save_protocol(p, path)
    q = load_protocol(path)
    assert q == p
    assert all(np.array_equal(q.raw(a), p.raw(a)) for a in p.actions)


@settings(max_examples=50)
@given(protocols())
def test_json_round_trip(tmp_path_factory, p):
    path = tmp_path_factory.mktemp("rt") / "p.json"
    save_protocol_json(p, path)
    assert load_protocol_json(path) == p


@given(protocols())
def test_sample_sizes_sum_to_entries(p):
    assert sum(sample_of(p, a).n for a in p.actions) == p.n_entries


@given(protocols(), st.data())
def test_disjoint_sub_protocols_partition_entries(p, data):
    acts = list(p.actions)
    mask = data.draw(st.lists(st.booleans(), min_size=len(acts), max_size=len(acts)))
    M = [a for a, m in zip(acts, mask) if m]
    M2 = [a for a, m in zip(acts, mask) if not m]
    if not M or not M2:
        return
    union = sub_protocol(p, M + M2).entries
    parts = sub_protocol(p, M).entries + sub_protocol(p, M2).entries
    assert sorted(union) == sorted(parts)
