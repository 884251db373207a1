"""Trace replay: gamma, T ~> v.

Replay reruns a recorded trace on a (possibly different) environment and
fails as soon as the control flow it would take departs from the record.
Function bodies are replayed from the trace, never from the code pointer.
"""

from __future__ import annotations

from .errors import EvalError, ReplayInconsistent, TmlError, UnboundVariable
from .evaluate import Fuel, deep_recursion, eval_primitive, make_closure
from .syntax import (
    Env,
    TApp,
    TCase,
    TConst,
    TFst,
    TFun,
    THole,
    TInl,
    TInr,
    TLet,
    TPair,
    TPrim,
    Trace,
    TRoll,
    TSnd,
    TUnroll,
    TVar,
    Value,
    VClosure,
    VConst,
    VInl,
    VInr,
    VPair,
    VRoll,
)


def replay(env: Env, trace: Trace, fuel: int | Fuel | None = None) -> Value:
    budget = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    with deep_recursion():
        return _replay(env, trace, budget)


def is_consistent(env: Env, trace: Trace) -> bool:
    try:
        replay(env, trace)
    except (ReplayInconsistent, EvalError):
        return False
    return True


def _kind(v: Value) -> str:
    return {VInl: "inl", VInr: "inr", VPair: "a pair", VRoll: "roll", VClosure: "a closure"}.get(
        type(v), "a constant"
    )


def _replay(env: Env, t: Trace, fuel: Fuel) -> Value:
    fuel.tick()
    if isinstance(t, TVar):
        return env.lookup(t.name)
    if isinstance(t, TConst):
        return VConst(t.value)
    if isinstance(t, TPrim):
        args = [_replay(env, a, fuel) for a in t.args]
        try:
            return eval_primitive(t.op, args)
        except EvalError as exc:
            raise ReplayInconsistent(f"at {t.op}: {exc}") from None
    if isinstance(t, TLet):
        v1 = _replay(env, t.bound, fuel)
        return _replay(env.set(t.var, v1), t.body, fuel)
    if isinstance(t, TPair):
        return VPair(_replay(env, t.left, fuel), _replay(env, t.right, fuel))
    if isinstance(t, (TFst, TSnd)):
        v = _replay(env, t.trace, fuel)
        if not isinstance(v, VPair):
            raise ReplayInconsistent(f"trace records a projection, replay produced {_kind(v)}")
        return v.left if isinstance(t, TFst) else v.right
    if isinstance(t, TInl):
        return VInl(_replay(env, t.trace, fuel))
    if isinstance(t, TInr):
        return VInr(_replay(env, t.trace, fuel))
    if isinstance(t, TCase):
        v = _replay(env, t.scrut, fuel)
        want = VInl if t.side == "inl" else VInr
        if not isinstance(v, want):
            raise ReplayInconsistent(
                f"trace records {t.side} branch, replay produced {_kind(v)}"
            )
        return _replay(env.set(t.var, v.value), t.branch, fuel)
    if isinstance(t, TFun):
        try:
            return make_closure(t.fun, env)
        except UnboundVariable as exc:
            raise ReplayInconsistent(f"closure needs {exc.name}, which is unbound") from None
    if isinstance(t, TApp):
        fv = _replay(env, t.fn, fuel)
        if not isinstance(fv, VClosure):
            raise ReplayInconsistent(f"trace records an application, replay produced {_kind(fv)}")
        if fv.fun != t.fun:
            raise ReplayInconsistent(
                f"trace records a call to {t.fun.name}, replay produced a closure of {fv.fun.name}"
            )
        av = _replay(env, t.arg, fuel)
        inner = fv.env.set(t.fname, fv).set(t.param, av)
        return _replay(inner, t.body, fuel)
    if isinstance(t, TRoll):
        return VRoll(_replay(env, t.trace, fuel))
    if isinstance(t, TUnroll):
        v = _replay(env, t.trace, fuel)
        if not isinstance(v, VRoll):
            raise ReplayInconsistent(f"trace records unroll, replay produced {_kind(v)}")
        return v.value
    if isinstance(t, THole):
        raise ReplayInconsistent("cannot replay a hole")
    raise TmlError(f"not a trace: {t!r}")
