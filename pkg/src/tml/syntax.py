"""Abstract syntax of TML: types, expressions, values, environments and traces.

Every node is an immutable dataclass.  Type annotations carried by
expressions and traces (on function binders, injections and ``roll``) are
typing metadata only: they are excluded from equality and hashing, so two
terms that differ only in annotations are the same code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Generic, Iterable, Iterator, Mapping, TypeVar, Union

from .errors import TypeCheckError, UnboundVariable

K = TypeVar("K")
V = TypeVar("V")

Constant = Union[int, tuple]  # an int, or () for the unit value
UNIT: tuple = ()


class FrozenMap(Mapping[K, V], Generic[K, V]):
    """An immutable, insertion-ordered finite map with structural equality."""

    __slots__ = ("_d", "_hash")

    def __init__(self, items: Mapping[K, V] | Iterable[tuple[K, V]] = ()):
        self._d: dict[K, V] = dict(items)
        self._hash: int | None = None

    def __getitem__(self, key: K) -> V:
        return self._d[key]

    def __iter__(self) -> Iterator[K]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def set(self, key: K, value: V):
        d = dict(self._d)
        d[key] = value
        return type(self)(d)

    def update(self, other: Mapping[K, V]):
        d = dict(self._d)
        d.update(other)
        return type(self)(d)

    def without(self, *keys: K):
        return type(self)((k, v) for k, v in self._d.items() if k not in keys)

    def restrict(self, keys: Iterable[K]):
        keep = set(keys)
        return type(self)((k, v) for k, v in self._d.items() if k in keep)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrozenMap):
            return NotImplemented
        return self._d == other._d

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._d.items())
        return f"{type(self).__name__}({inner})"


# ---------------------------------------------------------------- types


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class TyInt(Type):
    pass


@dataclass(frozen=True)
class TyUnit(Type):
    pass


@dataclass(frozen=True)
class TyProd(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TySum(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TyArrow(Type):
    arg: Type
    res: Type


@dataclass(frozen=True)
class TyMu(Type):
    var: str
    body: Type


@dataclass(frozen=True)
class TyVar(Type):
    name: str


@dataclass(frozen=True)
class TyAny(Type):
    """Wildcard `_` in a surface annotation; filled in by the type checker."""


INT = TyInt()
UNIT_T = TyUnit()
BOOL = TySum(UNIT_T, UNIT_T)


def list_type(elem: Type) -> TyMu:
    return TyMu("a", TySum(UNIT_T, TyProd(elem, TyVar("a"))))


def subst_type(t: Type, var: str, repl: Type) -> Type:
    if isinstance(t, TyVar):
        return repl if t.name == var else t
    if isinstance(t, TyProd):
        return TyProd(subst_type(t.left, var, repl), subst_type(t.right, var, repl))
    if isinstance(t, TySum):
        return TySum(subst_type(t.left, var, repl), subst_type(t.right, var, repl))
    if isinstance(t, TyArrow):
        return TyArrow(subst_type(t.arg, var, repl), subst_type(t.res, var, repl))
    if isinstance(t, TyMu):
        if t.var == var:
            return t
        return TyMu(t.var, subst_type(t.body, var, repl))
    return t


def unfold(t: TyMu) -> Type:
    """mu a.s  ->  s[mu a.s / a]"""
    return subst_type(t.body, t.var, t)


def type_free_vars(t: Type) -> set[str]:
    if isinstance(t, TyVar):
        return {t.name}
    if isinstance(t, (TyProd, TySum)):
        return type_free_vars(t.left) | type_free_vars(t.right)
    if isinstance(t, TyArrow):
        return type_free_vars(t.arg) | type_free_vars(t.res)
    if isinstance(t, TyMu):
        return type_free_vars(t.body) - {t.var}
    return set()


# ---------------------------------------------------------- expressions


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    value: Constant


@dataclass(frozen=True)
class Prim(Expr):
    op: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Let(Expr):
    var: str
    bound: Expr
    body: Expr


@dataclass(frozen=True)
class Pair(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Fst(Expr):
    expr: Expr


@dataclass(frozen=True)
class Snd(Expr):
    expr: Expr


@dataclass(frozen=True)
class Inl(Expr):
    expr: Expr
    ty: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Inr(Expr):
    expr: Expr
    ty: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Match:
    """Match pointer m = {inl(x1).e1; inr(x2).e2}.

    `sugar` is "if" when the match came from an if-expression; it only
    affects printing.
    """

    var1: str
    branch1: Expr
    var2: str
    branch2: Expr
    sugar: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Case(Expr):
    scrut: Expr
    match: Match


@dataclass(frozen=True)
class Fun(Expr):
    """Code pointer: fun f(x).e.  Both `name` and `param` are bound in `body`.

    `tyenv` records the typing context the function was checked in; the
    trace checker uses it for application bodies.
    """

    name: str
    param: str
    body: Expr
    param_ty: Type | None = field(default=None, compare=False)
    ret_ty: Type | None = field(default=None, compare=False)
    tyenv: "TypeEnv | None" = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr


@dataclass(frozen=True)
class Roll(Expr):
    expr: Expr
    ty: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Unroll(Expr):
    expr: Expr


@dataclass(frozen=True)
class Labeled(Expr):
    """`e@L` in a session: a literal carrying a provenance label."""

    expr: Expr
    label: str


# ---------------------------------------------------------------- values


class Value:
    __slots__ = ()


@dataclass(frozen=True)
class VConst(Value):
    value: Constant


@dataclass(frozen=True)
class VPair(Value):
    left: Value
    right: Value


@dataclass(frozen=True)
class VInl(Value):
    value: Value


@dataclass(frozen=True)
class VInr(Value):
    value: Value


@dataclass(frozen=True)
class VRoll(Value):
    value: Value


@dataclass(frozen=True)
class VClosure(Value):
    fun: Fun
    env: "Env"


class Env(FrozenMap[str, Value]):
    """Environment gamma.  Lookup of an unbound name raises."""

    __slots__ = ()

    def lookup(self, name: str) -> Value:
        try:
            return self._d[name]
        except KeyError:
            raise UnboundVariable(name) from None


class TypeEnv(FrozenMap[str, Type]):
    __slots__ = ()

    def lookup(self, name: str) -> Type:
        try:
            return self._d[name]
        except KeyError:
            raise TypeCheckError(f"unbound variable: {name}") from None


def env_lookup(env: Env, name: str) -> Value:
    return env.lookup(name)


TRUE = VInl(VConst(UNIT))
FALSE = VInr(VConst(UNIT))


def bool_value(b: bool) -> Value:
    return TRUE if b else FALSE


def list_value(items: Iterable[Value]) -> Value:
    out: Value = VRoll(VInl(VConst(UNIT)))
    for v in reversed(list(items)):
        out = VRoll(VInr(VPair(v, out)))
    return out


def value_as_list(v: Value) -> list[Value] | None:
    """The elements of a list-shaped value, or None if it is not one."""
    items = []
    while isinstance(v, VRoll):
        inner = v.value
        if isinstance(inner, VInl) and inner.value == VConst(UNIT):
            return items
        if isinstance(inner, VInr) and isinstance(inner.value, VPair):
            items.append(inner.value.left)
            v = inner.value.right
            continue
        return None
    return None


# ---------------------------------------------------------------- traces


class Trace:
    __slots__ = ()


@dataclass(frozen=True)
class TVar(Trace):
    name: str


@dataclass(frozen=True)
class TConst(Trace):
    value: Constant


@dataclass(frozen=True)
class TPrim(Trace):
    op: str
    args: tuple[Trace, ...]


@dataclass(frozen=True)
class TLet(Trace):
    bound: Trace
    var: str
    body: Trace


@dataclass(frozen=True)
class TPair(Trace):
    left: Trace
    right: Trace


@dataclass(frozen=True)
class TFst(Trace):
    trace: Trace


@dataclass(frozen=True)
class TSnd(Trace):
    trace: Trace


@dataclass(frozen=True)
class TInl(Trace):
    trace: Trace
    ty: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class TInr(Trace):
    trace: Trace
    ty: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class TCase(Trace):
    """Case trace: the scrutinee trace and the taken branch ("inl"/"inr")."""

    match: Match
    side: str
    scrut: Trace
    branch: Trace

    @property
    def var(self) -> str:
        return self.match.var1 if self.side == "inl" else self.match.var2


@dataclass(frozen=True)
class TFun(Trace):
    fun: Fun


@dataclass(frozen=True)
class TApp(Trace):
    """app_k(T1, T2, f, x, T): f and x are the binders of k, rebound in T."""

    fun: Fun
    fn: Trace
    arg: Trace
    body: Trace

    @property
    def fname(self) -> str:
        return self.fun.name

    @property
    def param(self) -> str:
        return self.fun.param


@dataclass(frozen=True)
class TRoll(Trace):
    trace: Trace
    ty: Type | None = field(default=None, compare=False)


@dataclass(frozen=True)
class TUnroll(Trace):
    trace: Trace


@dataclass(frozen=True)
class THole(Trace):
    pass


HOLE = THole()

# ------------------------------------------------------------- primitives


@dataclass(frozen=True)
class PrimSig:
    arity: int
    args: tuple[Type, ...]
    result: Type
    impl: Callable[..., Value] = field(compare=False, repr=False)


def _int_op(fn: Callable[[int, int], int]) -> Callable[..., Value]:
    return lambda a, b: VConst(fn(a, b))


def _cmp_op(fn: Callable[[int, int], bool]) -> Callable[..., Value]:
    return lambda a, b: bool_value(fn(a, b))


PRIMITIVES: dict[str, PrimSig] = {
    "+": PrimSig(2, (INT, INT), INT, _int_op(lambda a, b: a + b)),
    "-": PrimSig(2, (INT, INT), INT, _int_op(lambda a, b: a - b)),
    "*": PrimSig(2, (INT, INT), INT, _int_op(lambda a, b: a * b)),
    "=": PrimSig(2, (INT, INT), BOOL, _cmp_op(lambda a, b: a == b)),
    "<": PrimSig(2, (INT, INT), BOOL, _cmp_op(lambda a, b: a < b)),
    "&&": PrimSig(2, (BOOL, BOOL), BOOL, lambda a, b: bool_value(a and b)),
    "||": PrimSig(2, (BOOL, BOOL), BOOL, lambda a, b: bool_value(a or b)),
    "not": PrimSig(1, (BOOL,), BOOL, lambda a: bool_value(not a)),
}

# ------------------------------------------------------------ free vars


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Prim):
        out: frozenset[str] = frozenset()
        for a in e.args:
            out |= free_vars(a)
        return out
    if isinstance(e, Let):
        return free_vars(e.bound) | (free_vars(e.body) - {e.var})
    if isinstance(e, Pair):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, (Fst, Snd, Inl, Inr, Roll, Unroll, Labeled)):
        return free_vars(e.expr)
    if isinstance(e, Case):
        return free_vars(e.scrut) | match_free_vars(e.match)
    if isinstance(e, Fun):
        return fun_free_vars(e)
    if isinstance(e, App):
        return free_vars(e.fn) | free_vars(e.arg)
    raise TypeError(f"not an expression: {e!r}")


def match_free_vars(m: Match) -> frozenset[str]:
    return (free_vars(m.branch1) - {m.var1}) | (free_vars(m.branch2) - {m.var2})


@lru_cache(maxsize=4096)
def fun_free_vars(k: Fun) -> frozenset[str]:
    return free_vars(k.body) - {k.name, k.param}


def closure_vars(k: Fun) -> tuple[str, ...]:
    """Free variables of a code pointer in a canonical (sorted) order."""
    return tuple(sorted(fun_free_vars(k)))


# -------------------------------------------------- partial-trace order


def trace_children(t: Trace) -> tuple[Trace, ...]:
    if isinstance(t, TPrim):
        return t.args
    if isinstance(t, TLet):
        return (t.bound, t.body)
    if isinstance(t, TPair):
        return (t.left, t.right)
    if isinstance(t, (TFst, TSnd, TInl, TInr, TRoll, TUnroll)):
        return (t.trace,)
    if isinstance(t, TCase):
        return (t.scrut, t.branch)
    if isinstance(t, TApp):
        return (t.fn, t.arg, t.body)
    return ()


def _same_head(s: Trace, t: Trace) -> bool:
    if type(s) is not type(t):
        return False
    if isinstance(s, TVar):
        return s.name == t.name
    if isinstance(s, TConst):
        return s.value == t.value and type(s.value) is type(t.value)
    if isinstance(s, TPrim):
        return s.op == t.op and len(s.args) == len(t.args)
    if isinstance(s, TLet):
        return s.var == t.var
    if isinstance(s, TCase):
        return s.match == t.match and s.side == t.side
    if isinstance(s, (TFun, TApp)):
        return s.fun == t.fun
    return True


def trace_leq(s: Trace, t: Trace) -> bool:
    """S <= T: T is obtained from S by filling holes."""
    if isinstance(s, THole):
        return True
    if not _same_head(s, t):
        return False
    return all(trace_leq(a, b) for a, b in zip(trace_children(s), trace_children(t)))


def count_holes(t: Trace) -> int:
    if isinstance(t, THole):
        return 1
    return sum(count_holes(c) for c in trace_children(t))


def trace_size(t: Trace) -> int:
    return 1 + sum(trace_size(c) for c in trace_children(t))
