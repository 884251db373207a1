"""Type checking for expressions, values, environments and traces.

Checking is unification-based.  Annotations on binders, injections and
`roll` are used when present, and `_` in an annotation (or a missing
annotation) becomes a unification variable.  `roll` and `unroll` need the
recursive type to be known by the end of checking.  A result type that is
still undetermined is reported as ambiguous.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .errors import TypeCheckError
from .syntax import (
    INT,
    PRIMITIVES,
    UNIT_T,
    App,
    Case,
    Const,
    Expr,
    Fst,
    Fun,
    Inl,
    Inr,
    Labeled,
    Let,
    Match,
    Pair,
    Prim,
    Roll,
    Snd,
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
    TyAny,
    TyArrow,
    TyInt,
    TyMu,
    TyProd,
    TySum,
    Type,
    TypeEnv,
    TyUnit,
    TyVar,
    Unroll,
    Value,
    Var,
    VClosure,
    VConst,
    VInl,
    VInr,
    VPair,
    VRoll,
    closure_vars,
    subst_type,
)


@dataclass(frozen=True)
class TyMeta(Type):
    """A unification variable (internal to the checker)."""

    ident: int


class _Checker:
    def __init__(self) -> None:
        self._ids = itertools.count()
        self._subst: dict[int, Type] = {}
        self._pending: list[tuple[Type, Type, str]] = []  # (mu type, unfolded, where)
        self._kappa_ctx: dict[int, dict[str, Type]] = {}
        self.label_types: dict[str, Type] = {}

    # ------------------------------------------------------ unification

    def fresh(self) -> TyMeta:
        return TyMeta(next(self._ids))

    def resolve(self, t: Type) -> Type:
        while isinstance(t, TyMeta) and t.ident in self._subst:
            t = self._subst[t.ident]
        return t

    def zonk(self, t: Type) -> Type:
        t = self.resolve(t)
        if isinstance(t, TyProd):
            return TyProd(self.zonk(t.left), self.zonk(t.right))
        if isinstance(t, TySum):
            return TySum(self.zonk(t.left), self.zonk(t.right))
        if isinstance(t, TyArrow):
            return TyArrow(self.zonk(t.arg), self.zonk(t.res))
        if isinstance(t, TyMu):
            return TyMu(t.var, self.zonk(t.body))
        return t

    def from_annotation(self, t: Type | None) -> Type:
        """Replace wildcards in a surface annotation with fresh metas."""
        if t is None or isinstance(t, TyAny):
            return self.fresh()
        if isinstance(t, TyProd):
            return TyProd(self.from_annotation(t.left), self.from_annotation(t.right))
        if isinstance(t, TySum):
            return TySum(self.from_annotation(t.left), self.from_annotation(t.right))
        if isinstance(t, TyArrow):
            return TyArrow(self.from_annotation(t.arg), self.from_annotation(t.res))
        if isinstance(t, TyMu):
            return TyMu(t.var, self.from_annotation(t.body))
        return t

    def occurs(self, ident: int, t: Type) -> bool:
        t = self.resolve(t)
        if isinstance(t, TyMeta):
            return t.ident == ident
        if isinstance(t, (TyProd, TySum)):
            return self.occurs(ident, t.left) or self.occurs(ident, t.right)
        if isinstance(t, TyArrow):
            return self.occurs(ident, t.arg) or self.occurs(ident, t.res)
        if isinstance(t, TyMu):
            return self.occurs(ident, t.body)
        return False

    def unify(self, a: Type, b: Type, where: str) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, TyMeta) or isinstance(b, TyMeta):
            meta, other = (a, b) if isinstance(a, TyMeta) else (b, a)
            if self.occurs(meta.ident, other):
                raise TypeCheckError(f"{where}: infinite type")
            self._subst[meta.ident] = other
            return
        if type(a) is not type(b):
            raise TypeCheckError(
                f"{where}: expected {self.show(a)}, found {self.show(b)}"
            )
        if isinstance(a, (TyProd, TySum)):
            self.unify(a.left, b.left, where)
            self.unify(a.right, b.right, where)
        elif isinstance(a, TyArrow):
            self.unify(a.arg, b.arg, where)
            self.unify(a.res, b.res, where)
        elif isinstance(a, TyMu):
            # alpha-equivalence: rename both binders to one fresh variable
            v = TyVar(f"'{next(self._ids)}")
            self.unify(subst_type(a.body, a.var, v), subst_type(b.body, b.var, v), where)
        elif isinstance(a, TyVar):
            raise TypeCheckError(f"{where}: type variables {a.name} and {b.name} differ")
        elif isinstance(a, (TyInt, TyUnit)):
            return
        else:
            raise TypeCheckError(f"{where}: cannot compare {a!r} and {b!r}")

    def show(self, t: Type) -> str:
        from .pretty import pretty_type

        return pretty_type(_metas_to_any(self.zonk(t)))

    # ------------------------------------------------- recursive types

    def roll_type(self, ann: Type | None, inner: Type, where: str) -> Type:
        mu = self.from_annotation(ann)
        self._require_mu(mu, inner, where)
        return mu

    def unroll_type(self, mu: Type, where: str) -> Type:
        out = self.fresh()
        self._require_mu(mu, out, where)
        return out

    def _require_mu(self, mu: Type, unfolded: Type, where: str) -> None:
        r = self.resolve(mu)
        if isinstance(r, TyMu):
            self.unify(subst_type(r.body, r.var, r), unfolded, where)
        elif isinstance(r, TyMeta):
            self._pending.append((mu, unfolded, where))
        else:
            raise TypeCheckError(f"{where}: expected a recursive type, found {self.show(r)}")

    def solve_pending(self) -> None:
        while self._pending:
            progress = False
            rest = []
            for mu, unfolded, where in self._pending:
                r = self.resolve(mu)
                if isinstance(r, TyMeta):
                    rest.append((mu, unfolded, where))
                    continue
                progress = True
                if not isinstance(r, TyMu):
                    raise TypeCheckError(f"{where}: expected a recursive type, found {self.show(r)}")
                self.unify(subst_type(r.body, r.var, r), unfolded, where)
            self._pending = rest
            if not progress and rest:
                self._default_to_list(rest[0])

    def _default_to_list(self, stuck: tuple[Type, Type, str]) -> None:
        """An unconstrained recursive type defaults to a list of something."""
        mu, unfolded, where = stuck
        elem = self.fresh()
        candidate = TyMu("a", TySum(UNIT_T, TyProd(elem, TyVar("a"))))
        try:
            self.unify(subst_type(candidate.body, "a", candidate), unfolded, where)
        except TypeCheckError:
            raise TypeCheckError(f"{where}: recursive type is ambiguous; annotation required") from None
        self.unify(mu, candidate, where)

    # -------------------------------------------------------- results

    def finish(self, t: Type, what: str) -> Type:
        self.solve_pending()
        out = self.zonk(t)
        if _has_meta(out):
            raise TypeCheckError(f"type of {what} is ambiguous; annotation required")
        return out

    # ---------------------------------------------------- expressions

    def expr(self, gamma: Mapping[str, Type], e: Expr) -> Type:
        if isinstance(e, Var):
            if e.name not in gamma:
                raise TypeCheckError(f"unbound variable: {e.name}")
            return gamma[e.name]
        if isinstance(e, Const):
            return UNIT_T if isinstance(e.value, tuple) else INT
        if isinstance(e, Prim):
            sig = PRIMITIVES[e.op]
            if len(e.args) != sig.arity:
                raise TypeCheckError(f"primitive {e.op} expects {sig.arity} arguments")
            for a, want in zip(e.args, sig.args):
                self.unify(want, self.expr(gamma, a), f"argument of {e.op}")
            return sig.result
        if isinstance(e, Let):
            t1 = self.expr(gamma, e.bound)
            return self.expr({**gamma, e.var: t1}, e.body)
        if isinstance(e, Pair):
            return TyProd(self.expr(gamma, e.left), self.expr(gamma, e.right))
        if isinstance(e, (Fst, Snd)):
            a, b = self.fresh(), self.fresh()
            kw = "fst" if isinstance(e, Fst) else "snd"
            self.unify(TyProd(a, b), self.expr(gamma, e.expr), f"operand of {kw}")
            return a if isinstance(e, Fst) else b
        if isinstance(e, (Inl, Inr)):
            sum_t = self.from_annotation(e.ty)
            a, b = self.fresh(), self.fresh()
            self.unify(TySum(a, b), sum_t, "injection annotation")
            inner = self.expr(gamma, e.expr)
            self.unify(a if isinstance(e, Inl) else b, inner, "injection")
            return sum_t
        if isinstance(e, Case):
            a, b = self.fresh(), self.fresh()
            self.unify(TySum(a, b), self.expr(gamma, e.scrut), "case scrutinee")
            return self.match(gamma, e.match, a, b)
        if isinstance(e, Fun):
            return self.fun(gamma, e)
        if isinstance(e, App):
            tf = self.expr(gamma, e.fn)
            ta = self.expr(gamma, e.arg)
            res = self.fresh()
            self.unify(TyArrow(ta, res), tf, "application")
            return res
        if isinstance(e, Roll):
            return self.roll_type(e.ty, self.expr(gamma, e.expr), "roll")
        if isinstance(e, Unroll):
            return self.unroll_type(self.expr(gamma, e.expr), "unroll")
        if isinstance(e, Labeled):
            t = self.expr(gamma, e.expr)
            if e.label in self.label_types:
                raise TypeCheckError(f"label {e.label} is used twice")
            self.label_types[e.label] = t
            return t
        raise TypeCheckError(f"not an expression: {e!r}")

    def match(self, gamma: Mapping[str, Type], m: Match, a: Type, b: Type) -> Type:
        t1 = self.expr({**gamma, m.var1: a}, m.branch1)
        t2 = self.expr({**gamma, m.var2: b}, m.branch2)
        self.unify(t1, t2, "case branches")
        return t1

    def fun(self, gamma: Mapping[str, Type], k: Fun) -> Type:
        arg = self.from_annotation(k.param_ty)
        res = self.from_annotation(k.ret_ty)
        arrow = TyArrow(arg, res)
        ctx = self.kappa_ctx(k)
        for x in closure_vars(k):
            if x not in gamma:
                raise TypeCheckError(f"unbound variable: {x}")
            self.unify(ctx[x], gamma[x], f"free variable {x} of {k.name}")
        body_ctx = {**ctx, k.name: arrow, k.param: arg}
        self.unify(res, self.expr(body_ctx, k.body), f"body of {k.name}")
        return arrow

    def kappa_ctx(self, k: Fun) -> dict[str, Type]:
        """Types of a code pointer's free variables, shared by all its uses."""
        ctx = self._kappa_ctx.get(id(k))
        if ctx is None:
            ctx = {x: self.fresh() for x in closure_vars(k)}
            if k.tyenv is not None:
                for x in ctx:
                    if x in k.tyenv:
                        self.unify(ctx[x], self.from_annotation(k.tyenv[x]), "recorded context")
            self._kappa_ctx[id(k)] = ctx
        return ctx

    # --------------------------------------------------------- values

    def value(self, v: Value) -> Type:
        if isinstance(v, VConst):
            return UNIT_T if isinstance(v.value, tuple) else INT
        if isinstance(v, VPair):
            return TyProd(self.value(v.left), self.value(v.right))
        if isinstance(v, VInl):
            return TySum(self.value(v.value), self.fresh())
        if isinstance(v, VInr):
            return TySum(self.fresh(), self.value(v.value))
        if isinstance(v, VRoll):
            return self.roll_type(None, self.value(v.value), "roll value")
        if isinstance(v, VClosure):
            gamma = {x: self.value(w) for x, w in v.env.items()}
            return self.fun(gamma, v.fun)
        raise TypeCheckError(f"not a value: {v!r}")

    # --------------------------------------------------------- traces

    def trace(self, gamma: Mapping[str, Type], t: Trace) -> Type:
        if isinstance(t, THole):
            return self.fresh()
        if isinstance(t, TVar):
            if t.name not in gamma:
                raise TypeCheckError(f"unbound variable in trace: {t.name}")
            return gamma[t.name]
        if isinstance(t, TConst):
            return UNIT_T if isinstance(t.value, tuple) else INT
        if isinstance(t, TPrim):
            sig = PRIMITIVES.get(t.op)
            if sig is None or len(t.args) != sig.arity:
                raise TypeCheckError(f"ill-formed primitive trace {t.op}")
            for a, want in zip(t.args, sig.args):
                self.unify(want, self.trace(gamma, a), f"argument of {t.op}")
            return sig.result
        if isinstance(t, TLet):
            t1 = self.trace(gamma, t.bound)
            return self.trace({**gamma, t.var: t1}, t.body)
        if isinstance(t, TPair):
            return TyProd(self.trace(gamma, t.left), self.trace(gamma, t.right))
        if isinstance(t, (TFst, TSnd)):
            a, b = self.fresh(), self.fresh()
            self.unify(TyProd(a, b), self.trace(gamma, t.trace), "projection trace")
            return a if isinstance(t, TFst) else b
        if isinstance(t, (TInl, TInr)):
            sum_t = self.from_annotation(t.ty)
            a, b = self.fresh(), self.fresh()
            self.unify(TySum(a, b), sum_t, "injection annotation")
            self.unify(a if isinstance(t, TInl) else b, self.trace(gamma, t.trace), "injection trace")
            return sum_t
        if isinstance(t, TCase):
            a, b = self.fresh(), self.fresh()
            self.unify(TySum(a, b), self.trace(gamma, t.scrut), "case trace scrutinee")
            m = t.match
            if t.side == "inl":
                taken = self.trace({**gamma, m.var1: a}, t.branch)
                other = self.expr({**gamma, m.var2: b}, m.branch2)
            else:
                taken = self.trace({**gamma, m.var2: b}, t.branch)
                other = self.expr({**gamma, m.var1: a}, m.branch1)
            self.unify(taken, other, "case trace branches")
            return taken
        if isinstance(t, TFun):
            return self.fun(gamma, t.fun)
        if isinstance(t, TApp):
            k = t.fun
            tf = self.trace(gamma, t.fn)
            ta = self.trace(gamma, t.arg)
            res = self.fresh()
            self.unify(TyArrow(ta, res), tf, "application trace")
            self.unify(TyArrow(self.from_annotation(k.param_ty), self.from_annotation(k.ret_ty)), tf, "code pointer")
            body_ctx = {**self.kappa_ctx(k), k.name: tf, k.param: ta}
            self.unify(res, self.trace(body_ctx, t.body), f"body trace of {k.name}")
            return res
        if isinstance(t, TRoll):
            return self.roll_type(t.ty, self.trace(gamma, t.trace), "roll trace")
        if isinstance(t, TUnroll):
            return self.unroll_type(self.trace(gamma, t.trace), "unroll trace")
        raise TypeCheckError(f"not a trace: {t!r}")


def _has_meta(t: Type) -> bool:
    if isinstance(t, TyMeta):
        return True
    if isinstance(t, (TyProd, TySum)):
        return _has_meta(t.left) or _has_meta(t.right)
    if isinstance(t, TyArrow):
        return _has_meta(t.arg) or _has_meta(t.res)
    if isinstance(t, TyMu):
        return _has_meta(t.body)
    return False


def _metas_to_any(t: Type) -> Type:
    if isinstance(t, TyMeta):
        return TyAny()
    if isinstance(t, TyProd):
        return TyProd(_metas_to_any(t.left), _metas_to_any(t.right))
    if isinstance(t, TySum):
        return TySum(_metas_to_any(t.left), _metas_to_any(t.right))
    if isinstance(t, TyArrow):
        return TyArrow(_metas_to_any(t.arg), _metas_to_any(t.res))
    if isinstance(t, TyMu):
        return TyMu(t.var, _metas_to_any(t.body))
    return t


def _gamma(gamma: Mapping[str, Type] | None) -> dict[str, Type]:
    return dict(gamma or {})


# ---------------------------------------------------------- public API


def check_expr(gamma: Mapping[str, Type] | None, e: Expr) -> Type:
    """Gamma |- e : tau."""
    c = _Checker()
    return c.finish(c.expr(_gamma(gamma), e), "expression")


def check_expr_labels(gamma: Mapping[str, Type] | None, e: Expr) -> tuple[Type, dict[str, Type]]:
    """Like check_expr, also returning the type of each labeled literal."""
    c = _Checker()
    t = c.finish(c.expr(_gamma(gamma), e), "expression")
    labels = {}
    for name, lt in c.label_types.items():
        labels[name] = c.finish(lt, f"labeled literal @{name}")
    return t, labels


def check_value(v: Value, expected: Type | None = None) -> Type:
    """|- v : tau.  Injections and rolls need `expected` to be unambiguous."""
    c = _Checker()
    t = c.value(v)
    if expected is not None:
        c.unify(c.from_annotation(expected), t, "value")
    return c.finish(t, "value")


def check_env(env: Mapping[str, Value], gamma: Mapping[str, Type]) -> None:
    """|- gamma : Gamma, checking each binding against its declared type."""
    for x, t in gamma.items():
        if x not in env:
            raise TypeCheckError(f"environment lacks a binding for {x}")
        check_value(env[x], t)


def check_trace(gamma: Mapping[str, Type] | None, t: Trace) -> Type:
    """Gamma |-_T T : tau."""
    c = _Checker()
    return c.finish(c.trace(_gamma(gamma), t), "trace")


def infer_env(env: Mapping[str, Value], hints: Mapping[str, Type] | None = None) -> TypeEnv:
    """Best-effort types for an environment; bindings that stay ambiguous are skipped."""
    out = {}
    for x, v in env.items():
        try:
            out[x] = check_value(v, (hints or {}).get(x))
        except TypeCheckError:
            continue
    return TypeEnv(out)


__all__ = ["check_expr", "check_expr_labels", "check_value", "check_env", "check_trace", "infer_env", "TyMeta"]
