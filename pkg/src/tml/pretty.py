"""Deterministic printers for types, expressions, values, patterns and traces.

`pretty_expr` output parses back to an equal expression.  Traces print in
the inline-application style: `T1 T2 |> f(x).(T)` and `T |>_inl x.(T1)`,
with holes shown as `_`.
"""

from __future__ import annotations

from typing import Callable

from .patterns import (
    PClosure,
    PConst,
    PDiamond,
    PHole,
    PInl,
    PInr,
    Pattern,
    PatternEnv,
    PPair,
    PRoll,
)
from .syntax import (
    BOOL,
    UNIT,
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
    type_free_vars,
)

# ---------------------------------------------------------------- types


def _list_elem(t: Type) -> Type | None:
    """If t is `mu a. unit + (s * a)` with a not free in s, return s."""
    if isinstance(t, TyMu) and isinstance(t.body, TySum) and t.body.left == UNIT_T:
        right = t.body.right
        if isinstance(right, TyProd) and right.right == TyVar(t.var) and t.var not in type_free_vars(right.left):
            return right.left
    return None


def pretty_type(t: Type, prec: int = 0) -> str:
    # prec: 0 arrow, 1 sum, 2 product, 3 postfix/atom
    if isinstance(t, TyInt):
        return "int"
    if isinstance(t, TyUnit):
        return "unit"
    if isinstance(t, TyAny):
        return "_"
    if isinstance(t, TyVar):
        return t.name
    if t == BOOL:
        return "bool"
    elem = _list_elem(t)
    if elem is not None:
        return f"{pretty_type(elem, 3)} list"
    if isinstance(t, TyArrow):
        s = f"{pretty_type(t.arg, 1)} -> {pretty_type(t.res, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, TySum):
        s = f"{pretty_type(t.left, 2)} + {pretty_type(t.right, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, TyProd):
        s = f"{pretty_type(t.left, 3)} * {pretty_type(t.right, 2)}"
        return f"({s})" if prec > 2 else s
    if isinstance(t, TyMu):
        s = f"mu {t.var}. {pretty_type(t.body, 0)}"
        return f"({s})"
    return repr(t)


# ---------------------------------------------------------- expressions

_BIN_PREC = {"||": 1, "&&": 2, "=": 3, "<": 3, "+": 5, "-": 5, "*": 6}
_APP_PREC = 7
_UNARY_PREC = 8


def _const(c: object) -> str:
    if c == UNIT and isinstance(c, tuple):
        return "()"
    if isinstance(c, int) and c < 0:
        return f"(-{-c})"
    return str(c)


def _expr_list_items(e: Expr) -> list[Expr] | None:
    items = []
    while isinstance(e, Roll) and (e.ty is None or _list_elem(e.ty) is not None or isinstance(e.ty, TyMu)):
        if e.ty is not None and _list_elem(e.ty) is None and not _mu_any_list(e.ty):
            return None
        inner = e.expr
        if isinstance(inner, Inl) and inner.expr == Const(UNIT) and inner.ty is None:
            return items
        if isinstance(inner, Inr) and isinstance(inner.expr, Pair) and inner.ty is None:
            items.append(inner.expr.left)
            e = inner.expr.right
            continue
        return None
    return None


def _mu_any_list(t: Type) -> bool:
    return isinstance(t, TyMu) and _list_elem(t) is not None


def _binder_ann(name: str, ty: Type | None) -> str:
    return f"({name}: {pretty_type(ty)})" if ty is not None else f"({name})"


def pretty_expr(e: Expr, prec: int = 0) -> str:
    """Print an expression so that parse_expr reads it back unchanged."""
    s, p = _expr(e)
    return f"({s})" if p < prec else s


def _expr(e: Expr) -> tuple[str, int]:
    if isinstance(e, Var):
        return e.name, 9
    if isinstance(e, Const):
        return _const(e.value), 9
    if isinstance(e, Labeled):
        return f"{pretty_expr(e.expr, 9)}@{e.label}", 9
    if isinstance(e, Pair):
        items = [e.left]
        rest: Expr = e.right
        # (a, (b, c)) and (a, b, c) parse identically
        while isinstance(rest, Pair):
            items.append(rest.left)
            rest = rest.right
        items.append(rest)
        return "(" + ", ".join(pretty_expr(i) for i in items) + ")", 9
    items = _expr_list_items(e) if isinstance(e, Roll) else None
    if items is not None:
        return "[" + ", ".join(pretty_expr(i) for i in items) + "]", 9
    if isinstance(e, Roll) and (e.ty is None or _mu_any_list(e.ty)):
        inner = e.expr
        if isinstance(inner, Inr) and isinstance(inner.expr, Pair) and inner.ty is None:
            return f"{pretty_expr(inner.expr.left, 5)} :: {pretty_expr(inner.expr.right, 4)}", 4
    if isinstance(e, Inl) and e.expr == Const(UNIT) and e.ty == BOOL:
        return "true", 9
    if isinstance(e, Inr) and e.expr == Const(UNIT) and e.ty == BOOL:
        return "false", 9
    if isinstance(e, Prim):
        if e.op == "not":
            return f"not {pretty_expr(e.args[0], _UNARY_PREC)}", _UNARY_PREC
        p = _BIN_PREC[e.op]
        left_prec = p + 1 if p == 3 else p
        right_prec = p + 1
        return f"{pretty_expr(e.args[0], left_prec)} {e.op} {pretty_expr(e.args[1], right_prec)}", p
    if isinstance(e, (Fst, Snd, Unroll)):
        kw = {Fst: "fst", Snd: "snd", Unroll: "unroll"}[type(e)]
        return f"{kw} {pretty_expr(e.expr, _UNARY_PREC)}", _UNARY_PREC
    if isinstance(e, (Inl, Inr, Roll)):
        kw = {Inl: "inl", Inr: "inr", Roll: "roll"}[type(e)]
        ann = f"[{pretty_type(e.ty)}]" if e.ty is not None else ""
        return f"{kw}{ann} {pretty_expr(e.expr, _UNARY_PREC)}", _UNARY_PREC
    if isinstance(e, App):
        return f"{pretty_expr(e.fn, _APP_PREC)} {pretty_expr(e.arg, 9)}", _APP_PREC
    if isinstance(e, Let):
        return f"let {e.var} = {pretty_expr(e.bound)} in {pretty_expr(e.body)}", 0
    if isinstance(e, Fun):
        ret = f": {pretty_type(e.ret_ty)}" if e.ret_ty is not None else ""
        return f"fun {e.name}{_binder_ann(e.param, e.param_ty)}{ret}. {pretty_expr(e.body)}", 0
    if isinstance(e, Case):
        m = e.match
        if m.sugar == "if" and m.var1 == "_" and m.var2 == "_":
            return (
                f"if {pretty_expr(e.scrut)} then {pretty_expr(m.branch1)} else {pretty_expr(m.branch2)}",
                0,
            )
        return (
            f"case {pretty_expr(e.scrut)} of {{inl({m.var1}). {pretty_expr(m.branch1)}; "
            f"inr({m.var2}). {pretty_expr(m.branch2)}}}",
            0,
        )
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------- values


def _flatten_pair(left: object, right: object, is_pair: Callable[[object], bool], parts) -> list:
    items = [left]
    while is_pair(right):
        a, right = parts(right)
        items.append(a)
    items.append(right)
    return items


def pretty_value(v: Value) -> str:
    if isinstance(v, VConst):
        if v.value == UNIT and isinstance(v.value, tuple):
            return "()"
        return str(v.value)
    if v == VInl(VConst(UNIT)):
        return "true"
    if v == VInr(VConst(UNIT)):
        return "false"
    if isinstance(v, VRoll):
        items = _value_list(v)
        if items is not None:
            return "[" + ",".join(pretty_value(i) for i in items) + "]"
        return f"roll({pretty_value(v.value)})"
    if isinstance(v, VPair):
        items = _flatten_pair(
            v.left, v.right, lambda x: isinstance(x, VPair), lambda x: (x.left, x.right)
        )
        return "(" + ",".join(pretty_value(i) for i in items) + ")"
    if isinstance(v, VInl):
        return f"inl({pretty_value(v.value)})"
    if isinstance(v, VInr):
        return f"inr({pretty_value(v.value)})"
    if isinstance(v, VClosure):
        return "<fun>" if v.fun.name == "_" else f"<fun {v.fun.name}>"
    raise TypeError(f"not a value: {v!r}")


def _value_list(v: Value) -> list[Value] | None:
    items = []
    while isinstance(v, VRoll):
        inner = v.value
        if inner == VInl(VConst(UNIT)):
            return items
        if isinstance(inner, VInr) and isinstance(inner.value, VPair):
            items.append(inner.value.left)
            v = inner.value.right
            continue
        return None
    return None


def pretty_env(env) -> str:
    return "[" + ", ".join(f"{k}={pretty_value(v)}" for k, v in env.items()) + "]"


# -------------------------------------------------------------- patterns


def pretty_pattern(p: Pattern) -> str:
    if isinstance(p, PHole):
        return "_"
    if isinstance(p, PDiamond):
        return "="
    if isinstance(p, PConst):
        if p.value == UNIT and isinstance(p.value, tuple):
            return "()"
        return str(p.value)
    if p == PInl(PConst(UNIT)):
        return "true"
    if p == PInr(PConst(UNIT)):
        return "false"
    if isinstance(p, PRoll):
        shown = _pattern_list(p)
        if shown is not None:
            return shown
        return f"roll({pretty_pattern(p.pat)})"
    if isinstance(p, PPair):
        items = _flatten_pair(
            p.left, p.right, lambda x: isinstance(x, PPair), lambda x: (x.left, x.right)
        )
        return "(" + ",".join(pretty_pattern(i) for i in items) + ")"
    if isinstance(p, PInl):
        return f"inl({pretty_pattern(p.pat)})"
    if isinstance(p, PInr):
        return f"inr({pretty_pattern(p.pat)})"
    if isinstance(p, PClosure):
        name = "fun" if p.fun.name == "_" else p.fun.name
        if len(p.env) == 0:
            return f"<{name}>"
        return f"<{name} | " + ", ".join(f"{k}={pretty_pattern(q)}" for k, q in p.env.items()) + ">"
    raise TypeError(f"not a pattern: {p!r}")


def _pattern_list(p: Pattern) -> str | None:
    """Print list-shaped patterns as [a,b] or a::b::_ ."""
    heads = []
    cur: Pattern = p
    while isinstance(cur, PRoll):
        inner = cur.pat
        if isinstance(inner, PInl) and inner.pat in (PConst(UNIT), PHole()):
            return "[" + ",".join(pretty_pattern(h) for h in heads) + "]"
        if isinstance(inner, PInr) and isinstance(inner.pat, PPair):
            heads.append(inner.pat.left)
            cur = inner.pat.right
            continue
        break
    if not heads:
        return None
    return "::".join(pretty_pattern(h) for h in heads) + "::" + _pattern_tail(cur)


def _pattern_tail(p: Pattern) -> str:
    s = pretty_pattern(p)
    return s


def pretty_pattern_env(rho: PatternEnv) -> str:
    return "[" + ", ".join(f"{k}={pretty_pattern(p)}" for k, p in rho.items()) + "]"


# ---------------------------------------------------------------- traces


def _fun_head(k: Fun) -> str:
    return f"fn {k.param}" if k.name == "_" else f"fun {k.name}({k.param})"


def pretty_trace(t: Trace) -> str:
    s, _ = _trace(t)
    return s


def _paren_trace(t: Trace, prec: int) -> str:
    s, p = _trace(t)
    return f"({s})" if p < prec else s


def _trace(t: Trace) -> tuple[str, int]:
    if isinstance(t, THole):
        return "_", 9
    if isinstance(t, TVar):
        return t.name, 9
    if isinstance(t, TConst):
        return _const(t.value), 9
    if isinstance(t, TPrim):
        if t.op == "not":
            return f"not({pretty_trace(t.args[0])})", 9
        p = _BIN_PREC[t.op]
        return f"{_paren_trace(t.args[0], p if p != 3 else 4)} {t.op} {_paren_trace(t.args[1], p + 1)}", p
    if isinstance(t, TPair):
        return f"({pretty_trace(t.left)}, {pretty_trace(t.right)})", 9
    if isinstance(t, TInl) and t.trace == TConst(UNIT) and t.ty == BOOL:
        return "true", 9
    if isinstance(t, TInr) and t.trace == TConst(UNIT) and t.ty == BOOL:
        return "false", 9
    if isinstance(t, (TFst, TSnd, TInl, TInr, TRoll, TUnroll)):
        kw = {TFst: "fst", TSnd: "snd", TInl: "inl", TInr: "inr", TRoll: "roll", TUnroll: "unroll"}[type(t)]
        return f"{kw}({pretty_trace(t.trace)})", 9
    if isinstance(t, TLet):
        return f"let {t.var} = {pretty_trace(t.bound)} in {pretty_trace(t.body)}", 0
    if isinstance(t, TFun):
        return _fun_head(t.fun), 9
    if isinstance(t, TApp):
        k = t.fun
        head = f"{_paren_trace(t.fn, 9)} {_paren_trace(t.arg, 9)}"
        label = f"fn {k.param}" if k.name == "_" else f"{k.name}({k.param})"
        return f"{head} |> {label}.({pretty_trace(t.body)})", 0
    if isinstance(t, TCase):
        scrut = _paren_trace(t.scrut, 1)
        if t.match.sugar == "if":
            arm = "then" if t.side == "inl" else "else"
            return f"{scrut} |>_{arm} ({pretty_trace(t.branch)})", 0
        return f"{scrut} |>_{t.side} {t.var}.({pretty_trace(t.branch)})", 0
    raise TypeError(f"not a trace: {t!r}")


# ------------------------------------------------------ annotated values


def _is_leaf(v) -> bool:
    from .annot import AClosure, AConst, AInl, AInr

    if isinstance(v, (AConst, AClosure)):
        return True
    return isinstance(v, (AInl, AInr)) and isinstance(v.value, AConst) and v.value.value == UNIT


def pretty_annotated(v, show: Callable[[object], str | None], style: str = "braced") -> str:
    """Print an annotated value.

    `show` renders an annotation, returning None for the blank one.  In the
    braced style every leaf carries `@{...}` (empty when blank); in the bare
    style blank annotations are omitted and others print as `@a`.  Compound
    nodes only show non-blank annotations, and list spines never do.
    """
    from .annot import AInl, AInr, APair, ARoll, erase

    def suffix(a: object, leaf: bool) -> str:
        body = show(a)
        if style == "bare":
            if body is None:
                return ""
            return f"@{body}" if _simple(body) else f"@{{{body}}}"
        if body is None:
            return "@{}" if leaf else ""
        return f"@{{{body}}}"

    def go(node) -> str:
        if _is_leaf(node):
            return pretty_value(erase(node)) + suffix(node.ann, True)
        if isinstance(node, ARoll):
            items = _annotated_list(node)
            if items is not None:
                return "[" + ",".join(go(i) for i in items) + "]"
            return f"roll({go(node.value)})" + suffix(node.ann, False)
        if isinstance(node, APair):
            parts = [node.left]
            rest = node.right
            while isinstance(rest, APair) and show(rest.ann) is None:
                parts.append(rest.left)
                rest = rest.right
            parts.append(rest)
            return "(" + ",".join(go(p) for p in parts) + ")" + suffix(node.ann, False)
        if isinstance(node, AInl):
            return f"inl({go(node.value)})" + suffix(node.ann, False)
        if isinstance(node, AInr):
            return f"inr({go(node.value)})" + suffix(node.ann, False)
        raise TypeError(f"not an annotated value: {node!r}")

    return go(v)


def _simple(body: str) -> bool:
    return all(ch.isalnum() or ch in "_.'" for ch in body)


def _annotated_list(v) -> list | None:
    from .annot import AConst, AInl, AInr, APair, ARoll

    items = []
    while isinstance(v, ARoll):
        inner = v.value
        if isinstance(inner, AInl) and isinstance(inner.value, AConst) and inner.value.value == UNIT:
            return items
        if isinstance(inner, AInr) and isinstance(inner.value, APair):
            items.append(inner.value.left)
            v = inner.value.right
            continue
        return None
    return None


# ------------------------------------------------------ expression terms

_ASSOC = {"+", "*", "&&", "||"}


def fold_term(t):
    """Display-only simplification: (t - a) - b becomes t - (a + b)."""
    from .extract import EConst, EPrim

    if not isinstance(t, EPrim):
        return t
    args = tuple(fold_term(a) for a in t.args)
    if t.op == "-" and isinstance(args[1], EConst) and isinstance(args[0], EPrim) and args[0].op == "-":
        inner = args[0]
        if isinstance(inner.args[1], EConst):
            a, b = inner.args[1].value, args[1].value
            if isinstance(a, int) and isinstance(b, int):
                return EPrim("-", (inner.args[0], EConst(a + b)))
    return EPrim(t.op, args)


def pretty_term(t, loc: Callable[[tuple], str]) -> str:
    """Print an expression-provenance term without spaces: `L*(L-1)`."""
    from .extract import EBot, EConst, ELoc, EPrim

    def go(term, ctx_prec: int) -> str:
        if isinstance(term, EBot):
            return "_"
        if isinstance(term, ELoc):
            return loc(term.path)
        if isinstance(term, EConst):
            return _const(term.value)
        if isinstance(term, EPrim):
            if term.op == "not":
                return f"not({go(term.args[0], 0)})"
            p = _BIN_PREC[term.op]
            left = go(term.args[0], p)
            right_arg = term.args[1]
            same = isinstance(right_arg, EPrim) and right_arg.op == term.op and term.op in _ASSOC
            right = go(right_arg, p if same else p + 1)
            s = f"{left}{term.op}{right}"
            return f"({s})" if p < ctx_prec else s
        raise TypeError(f"not a term: {term!r}")

    return go(fold_term(t), 0)
