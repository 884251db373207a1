"""Provenance extraction: the generic engine and its where/expression/dependency instances."""

import pytest

from conftest import run, running_env
from tml.annot import (
    AConst,
    AEnv,
    APair,
    erase,
    map_annotations,
    occ_nonbot,
    path_annotate,
    path_lookup,
)
from tml.errors import TmlError
from tml.extract import (
    EBOT,
    Deps,
    EConst,
    ELoc,
    EPrim,
    dep_structure,
    eq_except_at,
    eval_annotation_term,
    expr_structure,
    extract,
    initial_env,
    trivial_structure,
    where_of_term,
    where_structure,
)
from tml.parser import parse_env, parse_value
from tml.replay import replay
from tml.syntax import VConst, value_as_list


def anns(av):
    """Element annotations of an annotated list."""
    out = []
    while av.value.__class__.__name__ == "AInr":
        cell = av.value.value
        out.append(cell.left.ann)
        av = cell.right
    return out


@pytest.fixture
def map_case(map_run):
    return map_run


def test_trivial_instance_is_replay(map_case):
    env = initial_env(trivial_structure(), map_case.env)
    assert erase(extract(trivial_structure(), map_case.trace, env)) == replay(map_case.env, map_case.trace)


def test_where_on_map(map_case):
    out = extract(where_structure(), map_case.trace, path_annotate(map_case.env))
    assert erase(out) == parse_value("[2,2,4]")
    assert anns(out) == [None, ("f", 1, "y"), None]


def test_expression_on_map(map_case):
    out = extract(expr_structure(), map_case.trace, initial_env(expr_structure(), map_case.env))
    first, second, third = anns(out)
    assert first == EPrim("+", (ELoc(("xs", 1, 1, 1)), EConst(1)))
    assert second == ELoc(("f", 1, "y"))
    assert isinstance(third, EPrim) and third.args[1] == EConst(1)


def test_dependency_on_map(map_case):
    out = extract(dep_structure(), map_case.trace, initial_env(dep_structure(), map_case.env))
    first, second, third = anns(out)
    assert ("xs", 1, 1, 1) in first and ("f", 1, "y") in first
    assert ("f", 1, "y") in second
    assert ("f", 1, "y") in third


def test_expression_on_factorial():
    r = run("(fun h(x: int): int. if x = 0 then 1 else x * h (x - 1)) n", "[n=4]")
    out = extract(expr_structure(), r.trace, initial_env(expr_structure(), r.env))
    n = ELoc(("n",))

    def minus1(t):
        return EPrim("-", (t, EConst(1)))

    def times(a, b):
        return EPrim("*", (a, b))

    expected = times(n, times(minus1(n), times(minus1(minus1(n)), times(minus1(minus1(minus1(n))), EConst(1)))))
    assert out.ann == expected
    assert eval_annotation_term(r.env, out.ann) == VConst(24)


def test_where_on_pairs():
    r = run("let p = fst xs in (snd p, fst p + 0)", "[xs=((1,2),3)]")
    out = extract(where_structure(), r.trace, path_annotate(r.env))
    assert out.left.ann == ("xs", 1, 2)
    assert out.right.ann is None


def test_where_of_variable_copies():
    r = run("x", "[x=2]")
    out = extract(where_structure(), r.trace, AEnv({"x": AConst(2, "L")}))
    assert out == AConst(2, "L") and out.ann == "L"


def test_where_of_primitive_is_blank():
    r = run("x + y", "[x=1, y=2]")
    assert extract(where_structure(), r.trace, path_annotate(r.env)).ann is None


def test_expression_of_constant():
    r = run("5")
    assert extract(expr_structure(), r.trace, AEnv()).ann == EConst(5)


def test_dependency_of_constant_is_empty():
    r = run("5")
    assert extract(dep_structure(), r.trace, AEnv()).ann == Deps()


def test_dependency_first_argument_is_not_always_blank():
    # (1^a, 2^b)^c: projecting the first component picks up the pair's own annotation
    r = run("fst x", "[x=(1,2)]")
    env = AEnv({"x": APair(AConst(1, Deps(["a"])), AConst(2, Deps(["b"])), Deps(["c"]))})
    out = extract(dep_structure(), r.trace, env)
    assert out.ann == Deps(["a", "c"])


def test_dependency_case_adds_the_scrutinee():
    r = run("if x < 2 then 10 else 20", "[x=1]")
    out = extract(dep_structure(), r.trace, initial_env(dep_structure(), r.env))
    assert out.ann == Deps([("x",)])


def test_eval_annotation_term():
    env = parse_env("[x=(1,2), y=(2,3)]")
    t = EPrim("+", (ELoc(("x", 1)), ELoc(("y", 2))))
    assert eval_annotation_term(env, t) == VConst(4)
    assert eval_annotation_term(env, EConst(7)) == VConst(7)
    h = {("x",): parse_value("(1,2)"), ("x", 1): VConst(1), ("y", 1): VConst(3)}
    assert eval_annotation_term(h, ELoc(("x", 1))) == VConst(1)
    with pytest.raises(TmlError):
        eval_annotation_term(env, EBOT)
    with pytest.raises(TmlError):
        eval_annotation_term(env, ELoc(("z",)))


def test_eq_except_at():
    L = ("l",)
    assert eq_except_at(L, AConst(1, Deps()), AConst(1, Deps()))
    assert eq_except_at(L, AConst(1, Deps([L])), AConst(2, Deps([L])))
    assert not eq_except_at(L, AConst(1, Deps()), AConst(2, Deps()))


def test_where_from_expression(map_case):
    e = extract(expr_structure(), map_case.trace, initial_env(expr_structure(), map_case.env))
    w = extract(where_structure(), map_case.trace, path_annotate(map_case.env))
    assert map_annotations(e, where_of_term) == w


def test_where_copying_property(map_case):
    env = path_annotate(map_case.env)
    out = extract(where_structure(), map_case.trace, env)
    assert occ_nonbot(out) <= occ_nonbot(env)


def test_path_lookup_inside_closure():
    env = running_env()
    assert path_lookup(env, ("f", 1, "y")) == VConst(2)
    assert value_as_list(path_lookup(env, ("xs",))) == [VConst(1), VConst(2), VConst(3)]
