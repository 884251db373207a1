"""Recursive-descent parser for TML programs, types, patterns and values.

The concrete grammar is documented in docs/grammar.md.  Surface sugar is
removed here: `if` becomes a case over the boolean sum, list literals
become `roll`/`inl`/`inr` chains at type `t list`, tuples nest to the
right, and tuple binders in `let`/`fn` become projections.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable

from .errors import ParseError, SourceSpan
from .syntax import (
    BOOL,
    INT,
    PRIMITIVES,
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
    Match,
    Pair,
    Prim,
    Roll,
    Snd,
    TyAny,
    TyArrow,
    TyMu,
    TyProd,
    TySum,
    Type,
    TyVar,
    Unroll,
    Var,
    list_type,
)

KEYWORDS = {
    "let", "in", "fun", "fn", "if", "then", "else", "case", "of", "inl", "inr",
    "fst", "snd", "roll", "unroll", "not", "true", "false", "mu", "int", "bool",
    "unit", "list",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\(\*.*?\*\))
  | (?P<int>\d+)
  | (?P<label>@[A-Za-z][A-Za-z0-9_']*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>::|->|=>|&&|\|\||[-+*=<()\[\]{},;.:|<>~_@])
    """,
    re.VERBOSE | re.DOTALL,
)

_OPERATOR_CHARS = set("!$%^&/?\\#`")


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "label", "ident", "kw", "sym", "eof"
    text: str
    span: SourceSpan


def _span(text: str, start: int, end: int) -> SourceSpan:
    line = text.count("\n", 0, start) + 1
    col = start - (text.rfind("\n", 0, start) + 1) + 1
    return SourceSpan(start, end, line, col)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            ch = text[pos]
            run = re.match(r"[-+*=<>!$%^&/?\\#`|~@]+", text[pos:])
            if ch in _OPERATOR_CHARS or run:
                op = run.group(0) if run else ch
                raise ParseError(f"unknown primitive or operator {op!r}", _span(text, pos, pos + len(op)))
            raise ParseError(f"unexpected character {ch!r}", _span(text, pos, pos + 1))
        kind = m.lastgroup
        value = m.group(0)
        if kind != "ws":
            if kind == "ident" and value == "_":
                kind = "sym"
            elif kind == "ident" and value in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, value, _span(text, m.start(), m.end())))
        pos = m.end()
    tokens.append(Token("eof", "", _span(text, len(text), len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str, resolve: Callable[[str], object] | None = None):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.resolve = resolve
        self._fresh = itertools.count(1)

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "sym") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        t = tok or self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{msg} (found {found})", t.span)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise self.error("expected an identifier")
        return self.advance().text

    def binder(self) -> str:
        if self.at("_"):
            self.advance()
            return "_"
        return self.ident()

    def finish(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("unexpected trailing input")

    def fresh(self) -> str:
        return f"__p{next(self._fresh)}"

    # ------------------------------------------------------------ types

    def type_(self) -> Type:
        left = self.sum_type()
        if self.at("->"):
            self.advance()
            return TyArrow(left, self.type_())
        return left

    def sum_type(self) -> Type:
        left = self.prod_type()
        if self.at("+"):
            self.advance()
            return TySum(left, self.sum_type())
        return left

    def prod_type(self) -> Type:
        left = self.postfix_type()
        if self.at("*"):
            self.advance()
            return TyProd(left, self.prod_type())
        return left

    def postfix_type(self) -> Type:
        t = self.atom_type()
        while self.at("list"):
            self.advance()
            t = list_type(t)
        return t

    def atom_type(self) -> Type:
        t = self.tok
        if self.at("int"):
            self.advance()
            return INT
        if self.at("bool"):
            self.advance()
            return BOOL
        if self.at("unit"):
            self.advance()
            return UNIT_T
        if self.at("_"):
            self.advance()
            return TyAny()
        if self.at("mu"):
            self.advance()
            var = self.ident()
            self.expect(".")
            return TyMu(var, self.type_())
        if self.at("("):
            self.advance()
            inner = self.type_()
            self.expect(")")
            return inner
        if t.kind == "ident":
            self.advance()
            return TyVar(t.text)
        raise self.error("expected a type")

    def opt_bracket_type(self) -> Type | None:
        if self.at("["):
            self.advance()
            ty = self.type_()
            self.expect("]")
            return ty
        return None

    # ------------------------------------------------------ expressions

    def expr(self) -> Expr:
        if self.at("let"):
            return self.let_expr()
        if self.at("fun"):
            return self.fun_expr()
        if self.at("fn"):
            return self.fn_expr()
        if self.at("if"):
            self.advance()
            cond = self.expr()
            self.expect("then")
            e1 = self.expr()
            self.expect("else")
            e2 = self.expr()
            return Case(cond, Match("_", e1, "_", e2, sugar="if"))
        if self.at("case"):
            return self.case_expr()
        return self.or_expr()

    def tuple_binder(self) -> object:
        """A binder: a name, `_`, or a parenthesised tuple of binders."""
        if self.at("("):
            self.advance()
            items = [self.tuple_binder()]
            while self.at(","):
                self.advance()
                items.append(self.tuple_binder())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            out = items[-1]
            for it in reversed(items[:-1]):
                out = (it, out)
            return out
        return self.binder()

    def destructure(self, pat: object, source: str, body: Expr) -> Expr:
        if isinstance(pat, str):
            return Let(pat, Var(source), body) if pat != source else body
        left, right = pat  # type: ignore[misc]
        lname = left if isinstance(left, str) else self.fresh()
        rname = right if isinstance(right, str) else self.fresh()
        inner = body
        if not isinstance(right, str):
            inner = self.destructure(right, rname, inner)
        if not isinstance(left, str):
            inner = self.destructure(left, lname, inner)
        return Let(lname, Fst(Var(source)), Let(rname, Snd(Var(source)), inner))

    def let_expr(self) -> Expr:
        self.expect("let")
        if self.at("fun"):
            fun = self.fun_expr(stop_at_in=True)
            assert isinstance(fun, Fun)
            self.expect("in")
            return Let(fun.name, fun, self.expr())
        pat = self.tuple_binder()
        self.expect("=")
        bound = self.expr()
        self.expect("in")
        body = self.expr()
        if isinstance(pat, str):
            return Let(pat, bound, body)
        tmp = self.fresh()
        return Let(tmp, bound, self.destructure(pat, tmp, body))

    def param(self) -> tuple[str, Type | None]:
        if self.at("("):
            self.advance()
            name = self.binder()
            ty = None
            if self.at(":"):
                self.advance()
                ty = self.type_()
            self.expect(")")
            return name, ty
        return self.binder(), None

    def fun_expr(self, stop_at_in: bool = False) -> Expr:
        self.expect("fun")
        name = self.binder()
        param, pty = self.param()
        rty = None
        if self.at(":"):
            self.advance()
            rty = self.type_()
        if self.at("."):
            self.advance()
        elif self.at("="):
            self.advance()
        else:
            raise self.error("expected '.' or '=' after function header")
        body = self.expr()
        return Fun(name, param, body, pty, rty)

    def fn_expr(self) -> Expr:
        self.expect("fn")
        if self.at("(") and self.peek().kind == "ident" and self.peek(2).text == ":":
            param, pty = self.param()
            pat: object = param
        else:
            pat = self.tuple_binder()
            pty = None
        self.expect("=>")
        body = self.expr()
        if isinstance(pat, str):
            return Fun("_", pat, body, pty, None)
        tmp = self.fresh()
        return Fun("_", tmp, self.destructure(pat, tmp, body), None, None)

    def case_arm(self, kw: str) -> tuple[str, Expr]:
        self.expect(kw)
        if self.at("("):
            self.advance()
            var = self.binder()
            self.expect(")")
        else:
            var = self.binder()
        if self.at("."):
            self.advance()
        else:
            self.expect("=>")
        return var, self.expr()

    def case_expr(self) -> Expr:
        self.expect("case")
        scrut = self.expr()
        self.expect("of")
        braced = self.at("{")
        if braced:
            self.advance()
        x1, e1 = self.case_arm("inl")
        if self.at(";") or self.at("|"):
            self.advance()
        else:
            raise self.error("expected ';' or '|' between case arms")
        x2, e2 = self.case_arm("inr")
        if braced:
            self.expect("}")
        return Case(scrut, Match(x1, e1, x2, e2))

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self.at("||"):
            self.advance()
            left = Prim("||", (left, self.and_expr()))
        return left

    def and_expr(self) -> Expr:
        left = self.cmp_expr()
        while self.at("&&"):
            self.advance()
            left = Prim("&&", (left, self.cmp_expr()))
        return left

    def cmp_expr(self) -> Expr:
        left = self.cons_expr()
        if self.at("=", "<"):
            op = self.advance().text
            return Prim(op, (left, self.cons_expr()))
        return left

    def cons_expr(self) -> Expr:
        left = self.add_expr()
        if self.at("::"):
            self.advance()
            right = self.cons_expr()
            return Roll(Inr(Pair(left, right)), list_type(TyAny()))
        return left

    def add_expr(self) -> Expr:
        left = self.mul_expr()
        while self.at("+", "-"):
            op = self.advance().text
            left = Prim(op, (left, self.mul_expr()))
        return left

    def mul_expr(self) -> Expr:
        left = self.app_expr()
        while self.at("*"):
            self.advance()
            left = Prim("*", (left, self.app_expr()))
        return left

    def starts_operand(self) -> bool:
        t = self.tok
        if t.kind in ("int", "ident"):
            return True
        if t.kind == "kw":
            return t.text in ("fst", "snd", "inl", "inr", "roll", "unroll", "not", "true", "false")
        return t.kind == "sym" and t.text in ("(", "[")

    def app_expr(self) -> Expr:
        fn = self.unary()
        while self.starts_operand():
            fn = App(fn, self.unary())
        return fn

    def unary(self) -> Expr:
        if self.at("fst"):
            self.advance()
            return Fst(self.unary())
        if self.at("snd"):
            self.advance()
            return Snd(self.unary())
        if self.at("inl"):
            self.advance()
            ty = self.opt_bracket_type()
            return Inl(self.unary(), ty)
        if self.at("inr"):
            self.advance()
            ty = self.opt_bracket_type()
            return Inr(self.unary(), ty)
        if self.at("roll"):
            self.advance()
            ty = self.opt_bracket_type()
            return Roll(self.unary(), ty)
        if self.at("unroll"):
            self.advance()
            return Unroll(self.unary())
        if self.at("not"):
            self.advance()
            return Prim("not", (self.unary(),))
        if self.at("-") and self.peek().kind == "int":
            self.advance()
            return Const(-int(self.advance().text))
        return self.postfix()

    def postfix(self) -> Expr:
        e = self.atom()
        while self.tok.kind == "label":
            e = Labeled(e, self.advance().text[1:])
        return e

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Const(int(t.text))
        if t.kind == "ident":
            self.advance()
            return Var(t.text)
        if self.at("true"):
            self.advance()
            return Inl(Const(UNIT), BOOL)
        if self.at("false"):
            self.advance()
            return Inr(Const(UNIT), BOOL)
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return Const(UNIT)
            items = [self.expr()]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            self.expect(")")
            out = items[-1]
            for it in reversed(items[:-1]):
                out = Pair(it, out)
            return out
        if self.at("["):
            self.advance()
            items: list[Expr] = []
            if not self.at("]"):
                items.append(self.expr())
                while self.at(","):
                    self.advance()
                    items.append(self.expr())
            self.expect("]")
            return expr_list(items)
        raise self.error("expected an expression")

    # --------------------------------------------------------- patterns

    def pattern(self) -> object:
        from .patterns import PPair, PRoll

        left = self.pattern_unary()
        if self.at("::"):
            self.advance()
            right = self.pattern()
            return PRoll(_pinr(PPair(left, right)))
        return left

    def pattern_unary(self) -> object:
        from .patterns import PInl, PRoll

        if self.at("inl"):
            self.advance()
            return PInl(self.pattern_unary())
        if self.at("inr"):
            self.advance()
            return _pinr(self.pattern_unary())
        if self.at("roll"):
            self.advance()
            return PRoll(self.pattern_unary())
        return self.pattern_atom()

    def pattern_atom(self) -> object:
        from .patterns import PatternEnv, PClosure, PConst, PDiamond, PHole, PInl, PPair, PRoll

        t = self.tok
        if self.at("_"):
            self.advance()
            return PHole()
        if self.at("="):
            self.advance()
            return PDiamond()
        if t.kind == "int":
            self.advance()
            return PConst(int(t.text))
        if self.at("-") and self.peek().kind == "int":
            self.advance()
            return PConst(-int(self.advance().text))
        if self.at("true"):
            self.advance()
            return PInl(PConst(UNIT))
        if self.at("false"):
            self.advance()
            return _pinr(PConst(UNIT))
        if t.kind == "ident":
            if self.resolve is None:
                raise self.error("unexpected identifier in pattern")
            self.advance()
            return self.resolve(t.text)
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return PConst(UNIT)
            items = [self.pattern()]
            while self.at(","):
                self.advance()
                items.append(self.pattern())
            self.expect(")")
            out = items[-1]
            for it in reversed(items[:-1]):
                out = PPair(it, out)
            return out
        if self.at("["):
            self.advance()
            items = []
            if not self.at("]"):
                items.append(self.pattern())
                while self.at(","):
                    self.advance()
                    items.append(self.pattern())
            self.expect("]")
            out = PRoll(PInl(PConst(UNIT)))
            for it in reversed(items):
                out = PRoll(_pinr(PPair(it, out)))
            return out
        if self.at("<"):
            self.advance()
            if self.tok.kind == "ident":
                # <f | ...>: the code pointer of the closure bound to f
                name_tok = self.advance()
                known = self.resolve(name_tok.text) if self.resolve is not None else None
                if not isinstance(known, PClosure):
                    raise self.error(f"{name_tok.text} is not bound to a closure", name_tok)
                fun = known.fun
            else:
                fun = self.fun_expr()
            if not isinstance(fun, Fun):
                raise self.error("expected a function in closure pattern")
            entries = {}
            if self.at("|"):
                self.advance()
                entries = self.pattern_entries()
            self.expect(">")
            return PClosure(fun, PatternEnv(entries))
        raise self.error("expected a pattern")

    def pattern_entries(self) -> dict[str, object]:
        entries: dict[str, object] = {}
        if self.tok.kind != "ident":
            return entries
        while True:
            name = self.ident()
            if self.at("="):
                self.advance()
            else:
                self.expect("->")
            entries[name] = self.pattern()
            if not self.at(","):
                return entries
            self.advance()

    def pattern_env(self) -> object:
        from .patterns import PatternEnv

        self.expect("[")
        entries = self.pattern_entries()
        self.expect("]")
        return PatternEnv(entries)


def _pinr(p: object) -> object:
    from .patterns import PInr

    return PInr(p)


def expr_list(items: list[Expr]) -> Expr:
    out: Expr = Roll(Inl(Const(UNIT)), list_type(TyAny()))
    for it in reversed(items):
        out = Roll(Inr(Pair(it, out)), list_type(TyAny()))
    return out


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    p.finish()
    _check_prims(e)
    return e


def parse_type(text: str) -> Type:
    p = _Parser(text)
    t = p.type_()
    p.finish()
    return t


def parse_pattern(text: str, resolve: Callable[[str], object] | None = None):
    """Parse a pattern: `_` is a hole, `=` is the exact-match marker."""
    p = _Parser(text, resolve)
    pat = p.pattern()
    p.finish()
    return pat


def parse_pattern_env(text: str, resolve: Callable[[str], object] | None = None):
    p = _Parser(text, resolve)
    env = p.pattern_env()
    p.finish()
    return env


def parse_value(text: str):
    """Parse a complete value (a pattern without holes)."""
    from .patterns import pattern_to_value

    pat = parse_pattern(text)
    v = pattern_to_value(pat)
    if v is None:
        raise ParseError("a value may not contain holes or '='")
    return v


def parse_env(text: str):
    from .patterns import pattern_to_value
    from .syntax import Env

    penv = parse_pattern_env(text)
    out = {}
    for k, p in penv.items():
        v = pattern_to_value(p)
        if v is None:
            raise ParseError(f"binding for {k} is not a complete value")
        out[k] = v
    return Env(out)


def _check_prims(e: Expr) -> None:
    if isinstance(e, Prim) and e.op not in PRIMITIVES:
        raise ParseError(f"unknown primitive {e.op!r}")
    for child in getattr(e, "__dataclass_fields__", {}):
        val = getattr(e, child)
        if isinstance(val, Expr):
            _check_prims(val)
        elif isinstance(val, Match):
            _check_prims(val.branch1)
            _check_prims(val.branch2)
        elif isinstance(val, tuple):
            for v in val:
                if isinstance(v, Expr):
                    _check_prims(v)
