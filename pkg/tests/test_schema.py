import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from racgen.core import Literal, atom, initial_state, step
from racgen.domains import BUILDERS
from racgen.schema import ObjectUniverse, SchemaError, ground
from racgen.textfmt import (
    DomainSyntaxError,
    format_grounded,
    format_schema,
    parse_atom,
    parse_grounded,
    parse_literal,
    parse_schema,
)

SWITCHES = """\
type: switch
fluent: on(S:switch)
action: flip(S:switch)
flip(S) causes on(S) if -on(S)
flip(S) causes -on(S) if on(S)
"""


def test_parse_atom_and_literal():
    assert parse_atom("on(a,b)") == atom("on", "a", "b")
    assert parse_atom("handempty") == atom("handempty")
    assert parse_literal("-clear(x)") == Literal(atom("clear", "x"), False)
    with pytest.raises(DomainSyntaxError):
        parse_atom("on(a,")


def test_ground_switches():
    schema = parse_schema(SWITCHES)
    d = ground(schema, ObjectUniverse({"switch": ("s1", "s2")}))
    assert d.fluents == {atom("on", "s1"), atom("on", "s2")}
    assert d.actions == (atom("flip", "s1"), atom("flip", "s2"))
    s = step(d, initial_state(d, []), atom("flip", "s1"))
    assert s.true_atoms == {atom("on", "s1")}


def test_empty_universe_needs_flag():
    schema = parse_schema(SWITCHES)
    with pytest.raises(SchemaError):
        ground(schema, ObjectUniverse({"switch": ()}))
    d = ground(schema, ObjectUniverse({"switch": ()}), allow_empty=True)
    assert not d.fluents and not d.actions


def test_schema_round_trip():
    for name, build in BUILDERS.items():
        schema = build()
        again = parse_schema(format_schema(schema), name)
        assert format_schema(again) == format_schema(schema)


def test_grounded_round_trip():
    d = ground(BUILDERS["blocks"](), ObjectUniverse({"block": ("a", "b", "c")}))
    text = format_grounded(d, [atom("ontable", "a")])
    d2, init = parse_grounded(text)
    assert d2 == d
    assert init == {atom("ontable", "a")}


def test_syntax_error_reports_line():
    with pytest.raises(DomainSyntaxError) as err:
        parse_grounded("fluent: p\naction: a\na causes\n")
    assert err.value.line == 3


def test_subtype_grounding_logistics():
    u = ObjectUniverse(
        {"city": ("c",), "location": ("x", "y"), "truck": ("t",), "airplane": ("p",), "package": ("k",)},
        frozenset({atom("in_city", "x", "c"), atom("in_city", "y", "c"), atom("airport", "x")}),
    )
    d = ground(BUILDERS["logistics"](), u)
    assert atom("drive_truck", "t", "x", "y") in d.actions
    # only one airport, so no flight is instantiated
    assert not any(a.predicate == "fly_airplane" for a in d.actions)
    assert atom("in", "k", "p") in d.fluents and atom("in", "k", "t") in d.fluents


def test_where_guard_excludes_self_on():
    d = ground(BUILDERS["blocks"](), ObjectUniverse({"block": ("a", "b")}))
    assert atom("on", "a", "a") not in d.fluents
    assert atom("move", "a", "table") in d.actions


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=5))
def test_blocks_grounding_size(n):
    d = ground(BUILDERS["blocks"](), ObjectUniverse({"block": tuple(f"b{i}" for i in range(n))}))
    assert len(d.fluents) == n * (n - 1) + 2 * n
    assert len(d.actions) == n * (n - 1) + n
