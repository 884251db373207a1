import pytest

from tml.errors import ParseError
from tml.parser import parse_env, parse_expr, parse_pattern, parse_type, parse_value
from tml.patterns import DIAMOND, HOLE, PConst, PPair
from tml.pretty import pretty_expr, pretty_type
from tml.syntax import (
    BOOL,
    INT,
    App,
    Case,
    Const,
    Fst,
    Fun,
    Inr,
    Labeled,
    Let,
    Pair,
    Prim,
    Roll,
    Var,
    list_value,
    VConst,
)


def test_let_pair_fst():
    assert parse_expr("let x = (1,2) in fst x") == Let("x", Pair(Const(1), Const(2)), Fst(Var("x")))


def test_recursive_function():
    e = parse_expr("fun f(x). if x = 0 then 1 else x*(f(x-1))")
    assert isinstance(e, Fun) and e.name == "f" and e.param == "x"
    assert isinstance(e.body, Case) and e.body.match.sugar == "if"
    step = e.body.match.branch2
    assert step == Prim("*", (Var("x"), App(Var("f"), Prim("-", (Var("x"), Const(1))))))


def test_labeled_list_literal():
    e = parse_expr("[1@L1,2@L2,3@L3]")
    assert isinstance(e, Roll) and isinstance(e.expr, Inr)
    head = e.expr.expr.left
    assert head == Labeled(Const(1), "L1")


def test_patterns():
    assert parse_pattern("(_, 1)") == PPair(HOLE, PConst(1))
    assert parse_pattern("(=, _)") == PPair(DIAMOND, HOLE)


def test_types():
    assert parse_type("int -> int") == parse_type("(int) -> int")
    assert pretty_type(parse_type("int list")) == "int list"
    assert parse_type("bool") == BOOL
    assert parse_type("int * int -> int").arg == parse_type("int * int")


def test_values_and_envs():
    assert parse_value("[1,2]") == list_value([VConst(1), VConst(2)])
    assert parse_env("[x=1]")["x"] == VConst(1)
    with pytest.raises(ParseError):
        parse_value("(1,_)")


@pytest.mark.parametrize("bad", ["1 +", "let x = in 3", "fun (x). x", "(1,2", "x @"])
def test_syntax_errors_have_positions(bad):
    with pytest.raises(ParseError) as info:
        parse_expr(bad)
    assert "line 1, column" in str(info.value)


def test_unknown_primitive_is_rejected():
    with pytest.raises(ParseError):
        parse_expr("1 % 2")


@pytest.mark.parametrize(
    "src",
    [
        "fun f(x: int): int. if x = 0 then 1 else x * f (x - 1)",
        "let (a, b) = (1, 2) in a + b",
        "case inl[int + int] 3 of inl(a). a | inr(b). b",
        "fn x => x + 1",
        "1 :: 2 :: []",
        "not (1 < 2) && true || false",
    ],
)
def test_pretty_round_trip(src):
    e = parse_expr(src)
    assert parse_expr(pretty_expr(e)) == e


def test_integer_type_default():
    assert parse_type("int") == INT
