import pytest

from conftest import run, running_env
from tml.errors import EvalError, FuelExhausted, ReplayInconsistent, UnboundVariable
from tml.evaluate import evaluate
from tml.parser import parse_env, parse_expr, parse_value
from tml.replay import is_consistent, replay
from tml.syntax import (
    Env,
    TApp,
    TCase,
    TConst,
    TFst,
    TPair,
    VConst,
    list_value,
    trace_children,
)

FACT = "let f = fun f(x). if x = 0 then 1 else x*(f(x-1)) in f 4"


def frames(t, kind):
    found = [t] if isinstance(t, kind) else []
    for c in trace_children(t):
        found += frames(c, kind)
    return found


def test_factorial_value():
    assert run(FACT).value == VConst(24)


def test_factorial_trace_shape():
    t = run(FACT).trace
    apps = frames(t, TApp)
    sides = [c.side for c in frames(t, TCase)]
    assert len(apps) == 5
    assert sides.count("inr") == 4 and sides.count("inl") == 1


def test_running_example_value(map_run):
    assert map_run.value == parse_value("[2,2,4]")


def test_bool_primitives():
    assert run("if 1 < 2 && not (2 = 3) then 10 else 20").value == VConst(10)


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(Env(), parse_expr("x + 1"))


def test_fuel_exhaustion():
    with pytest.raises(FuelExhausted):
        evaluate(Env(), parse_expr("(fun loop(x: int): int. loop x) 0"), fuel=1000)


def test_deep_recursion_is_not_a_python_limit():
    src = "(fun down(x: int): int. if x = 0 then 0 else down (x - 1)) 5000"
    assert run(src).value == VConst(0)


def test_replay_reproduces_the_value(map_run):
    assert replay(map_run.env, map_run.trace) == map_run.value


def test_replay_follows_the_trace_under_new_inputs():
    r = run("x + y", "[x=1, y=2]")
    assert replay(parse_env("[x=5, y=2]"), r.trace) == VConst(7)


def test_replay_rejects_a_different_branch():
    r = run("case z of inl(a). a | inr(b). b + 1", "[z=inl 3]")
    with pytest.raises(ReplayInconsistent, match="inl"):
        replay(parse_env("[z=inr 3]"), r.trace)


def test_replay_after_changing_f_free_variable():
    r = run("map f xs", running_env(y=2, xs="[1,3,3]"))
    assert replay(running_env(y=2, xs="[1,3,4]"), r.trace) == parse_value("[2,4,5]")
    assert not is_consistent(running_env(y=2, xs="[1,2,4]"), r.trace)


def test_nonsense_trace_is_inconsistent():
    assert not is_consistent(Env(), TFst(TConst(42)))
    assert is_consistent(Env(), TFst(TPair(TConst(1), TConst(2))))


def test_list_values():
    assert run("[1, 2] ").value == list_value([VConst(1), VConst(2)])


def test_eval_error_is_a_tml_error():
    assert issubclass(UnboundVariable, EvalError)
