"""Random well-typed programs, environments and values for property tests.

Programs are built type-directed, so every annotation they need is filled
in.  Recursion only appears in guarded forms (counting down on an int, or
walking down a list), but callers should still run them with bounded fuel.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import count
from typing import Sequence

from .errors import EvalError
from .evaluate import evaluate
from .syntax import (
    BOOL,
    INT,
    UNIT,
    UNIT_T,
    App,
    Case,
    Const,
    Env,
    Expr,
    Fst,
    Fun,
    Inl,
    Inr,
    Let,
    Match,
    Pair,
    Prim,
    Roll,
    Snd,
    Trace,
    TyArrow,
    TyMu,
    TyProd,
    TySum,
    Type,
    Unroll,
    Value,
    Var,
    VClosure,
    VConst,
    VInl,
    VInr,
    VPair,
    VRoll,
    list_type,
    unfold,
)

INT_LIST = list_type(INT)
INT_PAIR = TyProd(INT, INT)
INT_SUM = TySum(INT, INT)
INT_FUN = TyArrow(INT, INT)
LIST_FUN = TyArrow(INT_LIST, INT)

DATA_TYPES: tuple[Type, ...] = (INT, INT, BOOL, INT_PAIR, INT_SUM, INT_LIST)
INPUT_TYPES: tuple[Type, ...] = (INT, INT, BOOL, INT_PAIR, INT_SUM, INT_LIST, INT_FUN)


@dataclass(frozen=True)
class Program:
    """A closed-up program: an expression, its inputs and their types."""

    expr: Expr
    env: Env
    type_env: dict
    result_type: Type


@dataclass(frozen=True)
class Run:
    program: Program
    value: Value
    trace: Trace


@dataclass
class Generator:
    rng: random.Random
    max_depth: int = 6
    ints: Sequence[int] = (0, 1, 2, 3)
    _names: "count[int]" = field(default_factory=count)

    def fresh(self, prefix: str) -> str:
        return f"{prefix}{next(self._names)}"

    # ---------------------------------------------------------- values

    def value(self, ty: Type, size: int = 3) -> Value:
        """A random closed value of a first-order type (or int -> int)."""
        if ty == INT:
            return VConst(self.rng.choice(self.ints))
        if ty == UNIT_T:
            return VConst(UNIT)
        if isinstance(ty, TyProd):
            return VPair(self.value(ty.left, size), self.value(ty.right, size))
        if isinstance(ty, TySum):
            if self.rng.random() < 0.5:
                return VInl(self.value(ty.left, size))
            return VInr(self.value(ty.right, size))
        if isinstance(ty, TyMu):
            body = unfold(ty)
            assert isinstance(body, TySum)
            if size <= 0 or self.rng.random() < 0.25:
                return VRoll(VInl(self.value(body.left, size)))
            assert isinstance(body.right, TyProd)
            return VRoll(VInr(VPair(self.value(body.right.left, size), self.value(ty, size - 1))))
        if isinstance(ty, TyArrow):
            fun = self.expr({}, ty, 2)
            v, _ = evaluate(Env(), fun)
            assert isinstance(v, VClosure)
            return v
        raise ValueError(f"cannot generate values of type {ty!r}")

    # ----------------------------------------------------- expressions

    def expr(self, ctx: dict, ty: Type, depth: int) -> Expr:
        """An expression of type `ty`; ctx maps atoms (expressions) to types."""
        atoms = [a for a, t in ctx.items() if t == ty]
        if depth <= 0:
            if atoms and self.rng.random() < 0.7:
                return self.rng.choice(atoms)
            return self.intro(ctx, ty, 0)
        roll = self.rng.random()
        if atoms and roll < 0.25:
            return self.rng.choice(atoms)
        if roll < 0.6:
            return self.intro(ctx, ty, depth)
        return self.elim(ctx, ty, depth)

    def intro(self, ctx: dict, ty: Type, depth: int) -> Expr:
        d = depth - 1
        r = self.rng.random()
        if ty == INT:
            if depth <= 0 or r < 0.4:
                return Const(self.rng.choice(self.ints))
            return Prim(self.rng.choice("+-*"), (self.expr(ctx, INT, d), self.expr(ctx, INT, d)))
        if ty == UNIT_T:
            return Const(UNIT)
        if ty == BOOL:
            if depth <= 0 or r < 0.2:
                return (Inl if self.rng.random() < 0.5 else Inr)(Const(UNIT), BOOL)
            if r < 0.7:
                return Prim(self.rng.choice("=<"), (self.expr(ctx, INT, d), self.expr(ctx, INT, d)))
            if r < 0.85:
                return Prim("not", (self.expr(ctx, BOOL, d),))
            return Prim(self.rng.choice(("&&", "||")), (self.expr(ctx, BOOL, d), self.expr(ctx, BOOL, d)))
        if isinstance(ty, TyProd):
            return Pair(self.expr(ctx, ty.left, d), self.expr(ctx, ty.right, d))
        if isinstance(ty, TySum):
            if r < 0.5:
                return Inl(self.expr(ctx, ty.left, d), ty)
            return Inr(self.expr(ctx, ty.right, d), ty)
        if isinstance(ty, TyMu):
            body = unfold(ty)
            assert isinstance(body, TySum) and isinstance(body.right, TyProd)
            if depth <= 0 or r < 0.35:
                return Roll(Inl(Const(UNIT), body), ty)
            cell = Pair(self.expr(ctx, body.right.left, d), self.expr(ctx, ty, d))
            return Roll(Inr(cell, body), ty)
        if ty == INT_FUN:
            return self.int_fun(ctx, max(d, 0))
        if ty == LIST_FUN:
            return self.list_fun(ctx, max(d, 0))
        raise ValueError(f"cannot generate expressions of type {ty!r}")

    def int_fun(self, ctx: dict, depth: int) -> Fun:
        f, x = self.fresh("f"), self.fresh("x")
        inner = {**ctx, Var(x): INT}
        if depth <= 0 or self.rng.random() < 0.4:
            return Fun(f, x, self.expr(inner, INT, depth), INT, INT)
        # if x < 1 then base else step, where step may call f (x - 1)
        call = App(Var(f), Prim("-", (Var(x), Const(1))))
        guard = Prim("<", (Var(x), Const(1)))
        base = self.expr(inner, INT, depth - 1)
        step = self.expr({**inner, call: INT}, INT, depth - 1)
        return Fun(f, x, Case(guard, Match("_", base, "_", step, "if")), INT, INT)

    def list_fun(self, ctx: dict, depth: int) -> Fun:
        f, xs, u, p = self.fresh("f"), self.fresh("xs"), self.fresh("u"), self.fresh("p")
        inner = {**ctx, Var(xs): INT_LIST}
        base = self.expr({**inner, Var(u): UNIT_T}, INT, depth - 1)
        cell = {**inner, Var(p): TyProd(INT, INT_LIST), Fst(Var(p)): INT, App(Var(f), Snd(Var(p))): INT}
        step = self.expr(cell, INT, depth - 1)
        return Fun(f, xs, Case(Unroll(Var(xs)), Match(u, base, p, step)), INT_LIST, INT)

    def elim(self, ctx: dict, ty: Type, depth: int) -> Expr:
        d = depth - 1
        choice = self.rng.choice(("let", "let", "proj", "case", "if", "list", "app", "app"))
        if choice == "let":
            bty = self.rng.choice(DATA_TYPES + (INT_FUN,))
            x = self.fresh("v")
            return Let(x, self.expr(ctx, bty, d), self.expr({**ctx, Var(x): bty}, ty, d))
        if choice == "proj":
            other = self.rng.choice(DATA_TYPES)
            if self.rng.random() < 0.5:
                return Fst(self.expr(ctx, TyProd(ty, other), d))
            return Snd(self.expr(ctx, TyProd(other, ty), d))
        if choice == "case":
            sty = self.rng.choice((INT_SUM, TySum(INT, BOOL), TySum(INT_PAIR, INT)))
            x1, x2 = self.fresh("l"), self.fresh("r")
            return Case(
                self.expr(ctx, sty, d),
                Match(x1, self.expr({**ctx, Var(x1): sty.left}, ty, d),
                      x2, self.expr({**ctx, Var(x2): sty.right}, ty, d)),
            )
        if choice == "if":
            return Case(self.expr(ctx, BOOL, d), Match("_", self.expr(ctx, ty, d), "_", self.expr(ctx, ty, d), "if"))
        if choice == "list":
            u, p = self.fresh("u"), self.fresh("p")
            cell = TyProd(INT, INT_LIST)
            return Case(
                Unroll(self.expr(ctx, INT_LIST, d)),
                Match(u, self.expr({**ctx, Var(u): UNIT_T}, ty, d),
                      p, self.expr({**ctx, Var(p): cell}, ty, d)),
            )
        # application
        if ty == INT:
            fty = self.rng.choice((INT_FUN, LIST_FUN))
            return App(self.expr(ctx, fty, d), self.expr(ctx, fty.arg, d))
        return self.intro(ctx, ty, depth)

    # ------------------------------------------------------- programs

    def program(self, n_inputs: int | None = None, result_type: Type | None = None) -> Program:
        n = self.rng.randint(1, 3) if n_inputs is None else n_inputs
        tenv = {self.fresh("in"): self.rng.choice(INPUT_TYPES) for _ in range(n)}
        ty = result_type or self.rng.choice(DATA_TYPES)
        ctx = {Var(x): t for x, t in tenv.items()}
        e = self.expr(ctx, ty, self.rng.randint(2, self.max_depth))
        env = Env({x: self.value(t) for x, t in tenv.items()})
        return Program(e, env, tenv, ty)


def type_at(ty: Type, value: Value, path: Sequence) -> Type:
    """The type of the subvalue of `value` (of type `ty`) at `path`."""
    for step in path:
        if isinstance(ty, TyMu):
            ty = unfold(ty)
            assert isinstance(value, VRoll)
            value = value.value
            continue
        if isinstance(ty, TyProd):
            assert isinstance(value, VPair)
            ty, value = (ty.left, value.left) if step == 1 else (ty.right, value.right)
        elif isinstance(ty, TySum):
            if isinstance(value, VInl):
                ty, value = ty.left, value.value
            else:
                assert isinstance(value, VInr)
                ty, value = ty.right, value.value
        else:
            raise ValueError(f"path step {step!r} does not apply to {ty!r}")
    return ty


def random_pattern_below(rng: random.Random, v: Value, hole: float = 0.3):
    """A random diamond-free pattern p with p below v.

    Unit constants are never holed, so every hole has at least two
    possible fillings.
    """
    from .patterns import HOLE, PClosure, PConst, PInl, PInr, PPair, PRoll, PatternEnv

    if isinstance(v, VConst):
        if v.value == UNIT:
            return PConst(UNIT)
        return HOLE if rng.random() < hole else PConst(v.value)
    if rng.random() < hole:
        return HOLE
    if isinstance(v, VPair):
        return PPair(random_pattern_below(rng, v.left, hole), random_pattern_below(rng, v.right, hole))
    if isinstance(v, VInl):
        return PInl(random_pattern_below(rng, v.value, hole))
    if isinstance(v, VInr):
        return PInr(random_pattern_below(rng, v.value, hole))
    if isinstance(v, VRoll):
        return PRoll(random_pattern_below(rng, v.value, hole))
    if isinstance(v, VClosure):
        return PClosure(v.fun, PatternEnv({x: random_pattern_below(rng, w, hole) for x, w in v.env.items()}))
    raise TypeError(f"not a value: {v!r}")


def first_order_paths(env: Env, type_env: dict) -> list[tuple]:
    """Paths to nodes of first-order inputs, each with the node's type."""
    from .annot import subvalue_paths

    out = []
    for x, v in env.items():
        ty = type_env[x]
        if isinstance(ty, TyArrow):
            continue
        for path in subvalue_paths(Env({x: v})):
            out.append((path, type_at(ty, v, path[1:])))
    return out


def random_runs(seed: int, n: int, fuel: int = 20_000, max_depth: int = 6,
                ints: Sequence[int] = (0, 1, 2, 3)) -> list[Run]:
    """n programs that evaluate within `fuel`; others are discarded and replaced."""
    from .errors import FuelExhausted

    gen = Generator(random.Random(seed), max_depth, ints)
    out: list[Run] = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 50 * n:
            raise RuntimeError("generator keeps producing failing programs")
        prog = gen.program()
        try:
            v, t = evaluate(prog.env, prog.expr, fuel)
        except (FuelExhausted, EvalError, RecursionError):
            continue
        out.append(Run(prog, v, t))
    return out


__all__ = [
    "DATA_TYPES",
    "Generator",
    "INPUT_TYPES",
    "INT_FUN",
    "INT_LIST",
    "LIST_FUN",
    "Program",
    "Run",
    "first_order_paths",
    "random_pattern_below",
    "random_runs",
    "type_at",
]
