import pytest
from hypothesis import given, settings, strategies as st

from conftest import run
from tml.errors import SerializationError
from tml.generate import random_runs
from tml.parser import parse_pattern
from tml.serialize import TraceDocument, decode, deserialize_trace, encode, serialize_trace
from tml.slicing import disclosure_slice
from tml.syntax import count_holes

FACT = "let f = fun f(x). if x = 0 then 1 else x*(f(x-1)) in f 4"


def test_factorial_round_trip():
    r = run(FACT)
    data = serialize_trace(TraceDocument(trace=r.trace, env=r.env, value=r.value))
    assert serialize_trace(deserialize_trace(data)) == data
    assert deserialize_trace(data).trace == r.trace


def test_truncated_input(swap_run):
    data = serialize_trace(TraceDocument(trace=swap_run.trace))
    with pytest.raises(SerializationError, match="byte"):
        deserialize_trace(data[:-10])


def test_version_is_checked(swap_run):
    data = serialize_trace(TraceDocument(trace=swap_run.trace))
    with pytest.raises(SerializationError, match="version"):
        deserialize_trace(data.replace(b"tmltrace/1", b"tmltrace/9", 1))


def test_missing_header():
    with pytest.raises(SerializationError):
        deserialize_trace(b"(TConst 1)\n")


def test_unknown_tag_reports_offset():
    with pytest.raises(SerializationError) as info:
        deserialize_trace(b"tmltrace/1\n(Bogus 1)\n")
    assert info.value.offset == 11


def test_sliced_trace_keeps_its_holes(swap_run):
    s, rho = disclosure_slice(parse_pattern("(1,_)"), swap_run.trace)
    assert count_holes(s) == 2
    data = serialize_trace(TraceDocument(trace=s, pattern=parse_pattern("(1,_)"), pattern_env=rho))
    back = deserialize_trace(data)
    assert count_holes(back.trace) == 2
    assert serialize_trace(back) == data


def test_map_slice_has_three_holes(map_run):
    s, _ = disclosure_slice(parse_pattern("[_,_,_]"), map_run.trace)
    data = serialize_trace(TraceDocument(trace=s))
    assert count_holes(deserialize_trace(data).trace) == count_holes(s)


def test_diamonds_survive():
    p = parse_pattern("(=, _)")
    assert decode(encode(p)) == p


def test_strings_are_escaped():
    assert decode(encode(("a\"b", "é"))) == ("a\"b", "é")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_generated_traces_round_trip(seed):
    (r,) = random_runs(seed, 1)
    doc = TraceDocument(trace=r.trace, env=r.program.env, value=r.value)
    data = serialize_trace(doc)
    assert deserialize_trace(data) == doc
    assert serialize_trace(deserialize_trace(data)) == data
