import itertools

import pytest
from hypothesis import given, strategies as st

from tml.errors import IncompatiblePatterns
from tml.parser import parse_pattern, parse_value
from tml.patterns import (
    DIAMOND,
    HOLE,
    PatternEnv,
    diamond_subst,
    env_leq_values,
    is_diamond_free,
    join,
    leq,
    leq_value,
    matches_mod,
    restrict,
    to_pattern,
)

P = parse_pattern
V = parse_value


def test_hole_relates_everything():
    assert matches_mod(HOLE, V("1"), V("(2,3)"))


def test_diamond_is_equality():
    assert matches_mod(DIAMOND, V("1"), V("1"))
    assert not matches_mod(DIAMOND, V("1"), V("2"))


def test_pair_rule():
    assert matches_mod(P("(=,_)"), V("(1,2)"), V("(1,5)"))
    assert not matches_mod(P("(=,_)"), V("(1,2)"), V("(2,2)"))


def test_join():
    assert join(HOLE, P("(1,_)")) == P("(1,_)")
    assert join(DIAMOND, P("(1,_)")) == P("(1,=)")
    with pytest.raises(IncompatiblePatterns):
        join(P("inl 1"), P("inr 2"))
    with pytest.raises(IncompatiblePatterns):
        join(P("1"), P("2"))


def test_leq():
    assert leq(HOLE, P("(1,2)"))
    assert leq(P("(1,_)"), P("(1,2)"))
    assert leq(DIAMOND, P("[1,2]"))
    assert not leq(P("(1,2)"), P("(1,_)"))


def test_restrict():
    assert restrict(V("(1,2)"), P("(=,_)")) == P("(1,_)")
    assert restrict(V("(1,2)"), HOLE) == HOLE
    assert restrict(V("[1,2]"), DIAMOND) == to_pattern(V("[1,2]"))


def test_diamond_subst():
    assert diamond_subst(P("(1,_)")) == P("(1,=)")
    assert diamond_subst(DIAMOND) == DIAMOND
    assert diamond_subst(P("inl _")) == P("inl =")
    assert not is_diamond_free(P("inl ="))


def test_environments_treat_missing_names_as_holes():
    rho = PatternEnv({"x": P("(1,_)")})
    assert env_leq_values(rho, {"x": V("(1,5)"), "y": V("3")})
    assert not env_leq_values(rho, {"x": V("(2,5)")})


def test_pattern_env_drops_holes():
    assert "y" not in PatternEnv({"x": P("1"), "y": HOLE})


# ------------------------------------------------------------ properties

ints = st.integers(0, 2)
values = st.recursive(
    ints.map(str),
    lambda sub: st.one_of(
        st.tuples(sub, sub).map(lambda t: f"({t[0]},{t[1]})"),
        sub.map(lambda s: f"inl {s}"),
        sub.map(lambda s: f"inr {s}"),
    ),
    max_leaves=4,
).map(V)


def patterns_below(v):
    """Every pattern p with p ⊑ v (◇ included)."""
    from tml.patterns import PConst, PInl, PInr, PPair
    from tml.syntax import VConst, VInl, VInr, VPair

    out = [HOLE, DIAMOND]
    if isinstance(v, VConst):
        out.append(PConst(v.value))
    elif isinstance(v, VPair):
        out += [PPair(a, b) for a, b in itertools.product(patterns_below(v.left), patterns_below(v.right))]
    elif isinstance(v, VInl):
        out += [PInl(a) for a in patterns_below(v.value)]
    elif isinstance(v, VInr):
        out += [PInr(a) for a in patterns_below(v.value)]
    return out


@given(values)
def test_restriction_matches(v):
    for p in patterns_below(v):
        assert leq_value(p, v)
        r = restrict(v, p)
        assert is_diamond_free(r)
        assert matches_mod(p, v, v)


@given(values, st.data())
def test_join_is_a_semilattice(v, data):
    below = patterns_below(v)
    p = data.draw(st.sampled_from(below))
    q = data.draw(st.sampled_from(below))
    r = data.draw(st.sampled_from(below))
    assert join(p, HOLE) == p
    assert join(p, p) == p
    assert join(p, q) == join(q, p)
    assert join(join(p, q), r) == join(p, join(q, r))
    assert leq(p, join(p, q))
