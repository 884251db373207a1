import pytest

from conftest import run, running_env
from tml.annot import path_annotate, replace_at
from tml.annot import AConst
from tml.errors import PreconditionError
from tml.extract import where_structure
from tml.parser import parse_pattern as P, parse_pattern_env, parse_value as V
from tml.patterns import HOLE, PClosure, PatternEnv, leq, to_pattern
from tml.pretty import pretty_pattern, pretty_pattern_env, pretty_trace
from tml.slicing import (
    disc_view,
    disclosure_slice,
    extraction_from_slice_check,
    obf_view,
    obfuscation_slice,
    witness,
)
from tml.syntax import THole, TApp, TCase, count_holes, trace_children, trace_leq


def nodes(t, kind):
    found = [t] if isinstance(t, kind) else []
    for c in trace_children(t):
        found += nodes(c, kind)
    return found


def complete_f_calls(t):
    """Applications of f whose body trace kept the x = y test."""
    calls = [a for a in nodes(t, TApp) if a.fname == "f"]
    return [a for a in calls if isinstance(a.body, TCase)], [a for a in calls if isinstance(a.body, THole)]


def full_env_pattern(env):
    return {x: to_pattern(v) for x, v in env.items()}


# ------------------------------------------------------------- swap pair


def test_swap_disclosure(swap_run):
    s, rho = disclosure_slice(P("(1,_)"), swap_run.trace)
    assert pretty_trace(s) == "let x = (_, z) in (snd(x), _)"
    assert pretty_pattern_env(rho) == "[z=1]"


def test_hole_slices_to_nothing(swap_run):
    s, rho = disclosure_slice(HOLE, swap_run.trace)
    assert isinstance(s, THole) and len(rho) == 0


def test_swap_obfuscation(swap_run):
    p, s = obfuscation_slice(parse_pattern_env("[z=1]"), swap_run.trace)
    assert pretty_pattern(p) == "(1,_)"
    assert pretty_trace(s) == "let x = (_, z) in (snd(x), fst(x))"


def test_obfuscation_with_full_input_is_identity(swap_run):
    p, s = obfuscation_slice(full_env_pattern(swap_run.env), swap_run.trace)
    assert p == to_pattern(swap_run.value) and s == swap_run.trace


# ------------------------------------------------------------------ map


def test_map_spine(map_run):
    sl = disc_view(P("[_,_,_]"), map_run.env, map_run.trace, map_run.value)
    assert "f" not in sl.env_part
    assert pretty_pattern(sl.env_part["xs"]) == "[_,_,_]"
    maps = [a for a in nodes(sl.trace_part, TApp) if a.fname == "mapf"]
    assert len(maps) == 4
    complete, _ = complete_f_calls(sl.trace_part)
    assert not complete


def test_map_empty_list_pattern_uses_a_witness(map_run):
    sl = disc_view(P("[]"), map_run.env, map_run.trace, map_run.value)
    # the witness of [] against a cons is inr _, so only the first cons cell is kept
    assert pretty_pattern(sl.env_part["xs"]) == "roll(inr(_))"
    assert len([a for a in nodes(sl.trace_part, TApp) if a.fname == "mapf"]) == 1


def test_map_first_element(map_run):
    sl = disc_view(P("[2,_,_]"), map_run.env, map_run.trace, map_run.value)
    assert pretty_pattern_env(sl.env_part) == "[map=<map>, f=<f | y=2>, xs=[1,_,_]]"
    complete, _ = complete_f_calls(sl.trace_part)
    assert len(complete) == 1
    assert trace_leq(sl.trace_part, map_run.trace)


def test_map_middle_element():
    r = run("map f xs", running_env(xs="[1,2,3]"))
    sl = disc_view(P("_::2::_"), r.env, r.trace, r.value)
    assert pretty_pattern(sl.env_part["xs"]) == "_::2::_"
    complete, _ = complete_f_calls(sl.trace_part)
    assert len(complete) == 1 and complete[0].body.side == "inl"


def test_map_obfuscation_hiding_y(map_run):
    rho = full_env_pattern(map_run.env)
    rho["f"] = PClosure(rho["f"].fun, PatternEnv())
    p, s = obf_view(rho, map_run.env, map_run.trace, map_run.value)
    assert pretty_pattern(p) == "[_,_,_]"
    complete, holed = complete_f_calls(s)
    assert not complete and len(holed) == 3


def test_map_obfuscation_hiding_f(map_run):
    rho = full_env_pattern(map_run.env)
    del rho["f"]
    p, s = obf_view(rho, map_run.env, map_run.trace, map_run.value)
    assert pretty_pattern(p) == "[_,_,_]"
    assert not [a for a in nodes(s, TApp) if a.fname == "f"]


def test_map_obfuscation_hiding_the_tail(map_run):
    rho = full_env_pattern(map_run.env)
    rho["xs"] = P("_::_")
    p, s = obf_view(rho, map_run.env, map_run.trace, map_run.value)
    assert pretty_pattern(p) == "_::_"
    assert count_holes(s) >= 2


def test_obf_view_preconditions(swap_run):
    with pytest.raises(PreconditionError):
        obf_view(parse_pattern_env("[z = =]"), swap_run.env, swap_run.trace, swap_run.value)
    with pytest.raises(PreconditionError):
        obf_view(parse_pattern_env("[z=5]"), swap_run.env, swap_run.trace, swap_run.value)


# --------------------------------------------------------------- witness


def test_witness_examples():
    assert witness(P("7"), V("5")) == P("5")
    assert witness(P("inl _"), V("inr 3")) == P("inr _")
    assert witness(P("((1,_),_)"), V("((2,9),4)")) == P("((2,_),_)")


def test_witness_requires_a_mismatch():
    with pytest.raises(PreconditionError):
        witness(P("(1,_)"), V("(1,2)"))


def test_witness_is_below_the_value():
    w = witness(P("[1,2]"), V("[1,3,4]"))
    assert leq(w, to_pattern(V("[1,3,4]")))
    assert not leq(P("[1,2]"), w)


# ---------------------------------------------------- extraction from slices


def test_where_agrees_on_the_disclosed_part(map_run):
    p = P("_::2::_")
    env_hat = path_annotate(map_run.env)
    other = running_env(xs="[3,2,3]")
    r2 = run("map f xs", other)
    env_hat2 = replace_at(path_annotate(other), ("xs", 1, 1, 1), AConst(3, ("xs", 1, 1, 1)))
    assert extraction_from_slice_check(where_structure(), p, map_run.trace, env_hat, r2.trace, env_hat2)


def test_extraction_self_agreement(map_run):
    env_hat = path_annotate(map_run.env)
    assert extraction_from_slice_check(where_structure(), P("[2,_,_]"), map_run.trace, env_hat,
                                       map_run.trace, env_hat)
