"""Big-step tracing evaluation: gamma, e => v, T."""

from __future__ import annotations

import os
import sys
from contextlib import contextmanager
from typing import Iterator

from .errors import EvalError, FuelExhausted
from .syntax import (
    BOOL,
    PRIMITIVES,
    App,
    Case,
    Const,
    Env,
    Expr,
    Fst,
    Fun,
    Inl,
    Inr,
    Labeled,
    Let,
    Pair,
    Prim,
    Roll,
    Snd,
    TApp,
    TCase,
    TConst,
    TFst,
    TFun,
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
    Unroll,
    Value,
    Var,
    VClosure,
    VConst,
    VInl,
    VInr,
    VPair,
    VRoll,
    fun_free_vars,
)

DEFAULT_FUEL = 10**6
FUEL_ENV_VAR = "TML_FUEL"
_RECURSION_LIMIT = 200_000


def default_fuel() -> int:
    raw = os.environ.get(FUEL_ENV_VAR)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return DEFAULT_FUEL


class Fuel:
    """A step budget shared by one evaluation or replay."""

    __slots__ = ("remaining",)

    def __init__(self, amount: int | None = None):
        self.remaining = default_fuel() if amount is None else amount

    def tick(self) -> None:
        self.remaining -= 1
        if self.remaining < 0:
            raise FuelExhausted("fuel exhausted")


@contextmanager
def deep_recursion() -> Iterator[None]:
    """Raise the interpreter recursion limit for the duration of a run."""
    old = sys.getrecursionlimit()
    if old < _RECURSION_LIMIT:
        sys.setrecursionlimit(_RECURSION_LIMIT)
    try:
        yield
    except RecursionError:
        raise FuelExhausted("evaluation nested too deeply") from None
    finally:
        sys.setrecursionlimit(old)


def as_python(v: Value) -> int | bool | tuple:
    """Decode a base value for a primitive: ints, the unit, or booleans."""
    if isinstance(v, VConst):
        return v.value
    if isinstance(v, VInl) and v.value == VConst(()):
        return True
    if isinstance(v, VInr) and v.value == VConst(()):
        return False
    raise EvalError(f"primitive applied to non-base value {v!r}")


def eval_primitive(op: str, args: list[Value] | tuple[Value, ...]) -> Value:
    sig = PRIMITIVES.get(op)
    if sig is None:
        raise EvalError(f"unknown primitive: {op}")
    if len(args) != sig.arity:
        raise EvalError(f"primitive {op} expects {sig.arity} arguments, got {len(args)}")
    raw = [as_python(a) for a in args]
    for r, expected in zip(raw, sig.args):
        if expected == BOOL:
            if not isinstance(r, bool):
                raise EvalError(f"primitive {op} expects booleans")
        elif not isinstance(r, int) or isinstance(r, bool):
            raise EvalError(f"primitive {op} expects integers")
    return sig.impl(*raw)


def make_closure(k: Fun, env: Env) -> VClosure:
    """Closures capture exactly the free variables of their code."""
    return VClosure(k, Env((x, env.lookup(x)) for x in sorted(fun_free_vars(k))))


def evaluate(env: Env, e: Expr, fuel: int | Fuel | None = None) -> tuple[Value, Trace]:
    """Evaluate `e` in `env`, returning its value and trace."""
    budget = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    with deep_recursion():
        return _eval(env, e, budget)


def _eval(env: Env, e: Expr, fuel: Fuel) -> tuple[Value, Trace]:
    fuel.tick()
    if isinstance(e, Var):
        return env.lookup(e.name), TVar(e.name)
    if isinstance(e, Const):
        return VConst(e.value), TConst(e.value)
    if isinstance(e, Prim):
        vals, trs = [], []
        for a in e.args:
            v, t = _eval(env, a, fuel)
            vals.append(v)
            trs.append(t)
        return eval_primitive(e.op, vals), TPrim(e.op, tuple(trs))
    if isinstance(e, Let):
        v1, t1 = _eval(env, e.bound, fuel)
        v2, t2 = _eval(env.set(e.var, v1), e.body, fuel)
        return v2, TLet(t1, e.var, t2)
    if isinstance(e, Pair):
        v1, t1 = _eval(env, e.left, fuel)
        v2, t2 = _eval(env, e.right, fuel)
        return VPair(v1, v2), TPair(t1, t2)
    if isinstance(e, (Fst, Snd)):
        v, t = _eval(env, e.expr, fuel)
        if not isinstance(v, VPair):
            raise EvalError(f"projection from non-pair value {v!r}")
        if isinstance(e, Fst):
            return v.left, TFst(t)
        return v.right, TSnd(t)
    if isinstance(e, Inl):
        v, t = _eval(env, e.expr, fuel)
        return VInl(v), TInl(t, e.ty)
    if isinstance(e, Inr):
        v, t = _eval(env, e.expr, fuel)
        return VInr(v), TInr(t, e.ty)
    if isinstance(e, Case):
        v, t = _eval(env, e.scrut, fuel)
        m = e.match
        if isinstance(v, VInl):
            r, tb = _eval(env.set(m.var1, v.value), m.branch1, fuel)
            return r, TCase(m, "inl", t, tb)
        if isinstance(v, VInr):
            r, tb = _eval(env.set(m.var2, v.value), m.branch2, fuel)
            return r, TCase(m, "inr", t, tb)
        raise EvalError(f"case on non-sum value {v!r}")
    if isinstance(e, Fun):
        return make_closure(e, env), TFun(e)
    if isinstance(e, App):
        fv, t1 = _eval(env, e.fn, fuel)
        if not isinstance(fv, VClosure):
            raise EvalError(f"application of non-function value {fv!r}")
        av, t2 = _eval(env, e.arg, fuel)
        k = fv.fun
        inner = fv.env.set(k.name, fv).set(k.param, av)
        r, tb = _eval(inner, k.body, fuel)
        return r, TApp(k, t1, t2, tb)
    if isinstance(e, Roll):
        v, t = _eval(env, e.expr, fuel)
        return VRoll(v), TRoll(t, e.ty)
    if isinstance(e, Unroll):
        v, t = _eval(env, e.expr, fuel)
        if not isinstance(v, VRoll):
            raise EvalError(f"unroll of non-roll value {v!r}")
        return v.value, TUnroll(t)
    if isinstance(e, Labeled):
        raise EvalError(f"labeled literal @{e.label} must be lifted into the environment first")
    raise TypeError(f"not an expression: {e!r}")
