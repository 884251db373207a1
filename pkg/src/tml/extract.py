"""Generic provenance extraction F(T, gamma^) and its instances.

One traversal, parameterised by an `AnnotationStructure`.  Constructors
(pairs, injections, `roll`) always get the blank annotation; projections,
case, application and `unroll` combine the annotation of the value they
inspect with that of their result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Generic, Iterable, Mapping, TypeVar

from .annot import (
    AClosure,
    AConst,
    AEnv,
    AInl,
    AInr,
    APair,
    ARoll,
    AValue,
    Path,
    erase,
    path_str,
    with_ann,
)
from .errors import EvalError, ReplayInconsistent, TmlError
from .evaluate import Fuel, deep_recursion, eval_primitive
from .syntax import (
    UNIT,
    Constant,
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
    VConst,
    VInl,
    VInr,
    closure_vars,
)

A = TypeVar("A")


@dataclass(frozen=True)
class AnnotationStructure(Generic[A]):
    """The parameters (bottom, F_c, F_kappa, F_1 ... F_unroll, F_prim)."""

    name: str
    bottom: A
    f_const: Callable[[Constant], A]
    f_kappa: A
    f_1: Callable[[A, A], A]
    f_2: Callable[[A, A], A]
    f_L: Callable[[A, A], A]
    f_R: Callable[[A, A], A]
    f_app: Callable[[A, A], A]
    f_unroll: Callable[[A, A], A]
    f_prim: Callable[[str, tuple], A]
    location: Callable[[Path], A] = field(default=lambda p: None)


def extract(struct: AnnotationStructure, trace: Trace, env: Mapping[str, AValue],
            fuel: int | Fuel | None = None) -> AValue:
    """F(T, gamma^): propagate annotations through a trace."""
    budget = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    with deep_recursion():
        return _Extractor(struct, budget).run(AEnv(env), trace)


class _Extractor:
    def __init__(self, s: AnnotationStructure, fuel: Fuel):
        self.s = s
        self.fuel = fuel

    def run(self, env: AEnv, t: Trace) -> AValue:
        s = self.s
        self.fuel.tick()
        if isinstance(t, TVar):
            return env.lookup(t.name)
        if isinstance(t, TConst):
            return AConst(t.value, s.f_const(t.value))
        if isinstance(t, TPrim):
            args = [self.run(env, a) for a in t.args]
            try:
                v = eval_primitive(t.op, [erase(a) for a in args])
            except EvalError as exc:
                raise ReplayInconsistent(f"at {t.op}: {exc}") from None
            ann = s.f_prim(t.op, tuple(a.ann for a in args))
            return _base_value(v, ann, s.bottom)
        if isinstance(t, TLet):
            v1 = self.run(env, t.bound)
            return self.run(env.set(t.var, v1), t.body)
        if isinstance(t, TPair):
            return APair(self.run(env, t.left), self.run(env, t.right), s.bottom)
        if isinstance(t, (TFst, TSnd)):
            p = self.run(env, t.trace)
            if not isinstance(p, APair):
                raise ReplayInconsistent("trace records a projection of a non-pair")
            if isinstance(t, TFst):
                return with_ann(p.left, s.f_1(p.ann, p.left.ann))
            return with_ann(p.right, s.f_2(p.ann, p.right.ann))
        if isinstance(t, TInl):
            return AInl(self.run(env, t.trace), s.bottom)
        if isinstance(t, TInr):
            return AInr(self.run(env, t.trace), s.bottom)
        if isinstance(t, TCase):
            sv = self.run(env, t.scrut)
            want = AInl if t.side == "inl" else AInr
            if not isinstance(sv, want):
                raise ReplayInconsistent(f"trace records {t.side} branch, scrutinee differs")
            r = self.run(env.set(t.var, sv.value), t.branch)
            combine = s.f_L if t.side == "inl" else s.f_R
            return with_ann(r, combine(sv.ann, r.ann))
        if isinstance(t, TFun):
            try:
                captured = AEnv((x, env.lookup(x)) for x in closure_vars(t.fun))
            except TmlError as exc:
                raise ReplayInconsistent(f"closure of {t.fun.name}: {exc}") from None
            return AClosure(t.fun, captured, s.f_kappa)
        if isinstance(t, TApp):
            c = self.run(env, t.fn)
            if not isinstance(c, AClosure) or c.fun != t.fun:
                raise ReplayInconsistent(f"trace records a call to {t.fun.name}")
            a = self.run(env, t.arg)
            r = self.run(c.env.set(t.fname, c).set(t.param, a), t.body)
            return with_ann(r, s.f_app(c.ann, r.ann))
        if isinstance(t, TRoll):
            return ARoll(self.run(env, t.trace), s.bottom)
        if isinstance(t, TUnroll):
            r = self.run(env, t.trace)
            if not isinstance(r, ARoll):
                raise ReplayInconsistent("trace records unroll of a non-roll value")
            return with_ann(r.value, s.f_unroll(r.ann, r.value.ann))
        if isinstance(t, THole):
            raise ReplayInconsistent("cannot extract from a hole")
        raise TmlError(f"not a trace: {t!r}")


def _base_value(v: Value, ann: Any, bottom: Any) -> AValue:
    """Annotate a primitive result; a boolean's inner unit gets bottom."""
    if isinstance(v, VConst):
        return AConst(v.value, ann)
    if isinstance(v, VInl):
        return AInl(AConst(UNIT, bottom), ann)
    if isinstance(v, VInr):
        return AInr(AConst(UNIT, bottom), ann)
    raise TmlError(f"primitive produced a non-base value {v!r}")


def _second(_a: Any, b: Any) -> Any:
    return b


# ---------------------------------------------------------------- where


def where_structure() -> AnnotationStructure:
    """W: copies keep their location, everything computed is blank."""
    return AnnotationStructure(
        name="where",
        bottom=None,
        f_const=lambda c: None,
        f_kappa=None,
        f_1=_second,
        f_2=_second,
        f_L=_second,
        f_R=_second,
        f_app=_second,
        f_unroll=_second,
        f_prim=lambda op, args: None,
        location=lambda p: p,
    )


def trivial_structure() -> AnnotationStructure:
    """The one-point annotation set: extraction is replay."""
    return AnnotationStructure(
        name="trivial",
        bottom=None,
        f_const=lambda c: None,
        f_kappa=None,
        f_1=_second,
        f_2=_second,
        f_L=_second,
        f_R=_second,
        f_app=_second,
        f_unroll=_second,
        f_prim=lambda op, args: None,
        location=lambda p: None,
    )


# ------------------------------------------------------------ expression


class ETerm:
    __slots__ = ()


@dataclass(frozen=True)
class EBot(ETerm):
    """The blank expression annotation."""


@dataclass(frozen=True)
class ELoc(ETerm):
    path: Path


@dataclass(frozen=True)
class EConst(ETerm):
    value: Constant


@dataclass(frozen=True)
class EPrim(ETerm):
    op: str
    args: tuple[ETerm, ...]


EBOT = EBot()


def expr_structure() -> AnnotationStructure:
    """E: like W, but constants and primitive applications build terms."""
    return AnnotationStructure(
        name="expression",
        bottom=EBOT,
        f_const=EConst,
        f_kappa=EBOT,
        f_1=_second,
        f_2=_second,
        f_L=_second,
        f_R=_second,
        f_app=_second,
        f_unroll=_second,
        f_prim=lambda op, args: EPrim(op, tuple(args)),
        location=ELoc,
    )


def term_has_bottom(t: ETerm) -> bool:
    if isinstance(t, EBot):
        return True
    if isinstance(t, EPrim):
        return any(term_has_bottom(a) for a in t.args)
    return False


def term_locations(t: ETerm) -> list[Path]:
    if isinstance(t, ELoc):
        return [t.path]
    if isinstance(t, EPrim):
        return [p for a in t.args for p in term_locations(a)]
    return []


def eval_annotation_term(h: Mapping[Path, Value] | Mapping[str, Value] | Callable[[Path], Value],
                         t: ETerm) -> Value:
    """Evaluate t, replacing each path by its value under h (or gamma[pi])."""
    if isinstance(t, EBot):
        raise TmlError("cannot evaluate the blank annotation")
    if isinstance(t, EConst):
        return VConst(t.value)
    if isinstance(t, ELoc):
        return _resolve(h, t.path)
    if isinstance(t, EPrim):
        return eval_primitive(t.op, [eval_annotation_term(h, a) for a in t.args])
    raise TmlError(f"not an expression annotation: {t!r}")


def _resolve(h: Any, path: Path) -> Value:
    from .annot import path_lookup
    from .errors import PathMismatch

    if callable(h) and not isinstance(h, Mapping):
        return h(path)
    if isinstance(h, Env) or (isinstance(h, Mapping) and all(isinstance(k, str) for k in h)):
        try:
            return path_lookup(h, path)
        except PathMismatch as exc:
            raise TmlError(f"unresolvable path {path_str(path)}: {exc}") from None
    if path not in h:
        raise TmlError(f"unresolvable path {path_str(path)}")
    return h[path]


def where_of_term(t: ETerm) -> Path | None:
    """Locations map to themselves, every other term to bottom."""
    return t.path if isinstance(t, ELoc) else None


# ------------------------------------------------------------ dependency


class Deps:
    """A finite set of locations that remembers insertion order for printing."""

    __slots__ = ("items", "_set")

    def __init__(self, items: Iterable[Path] = ()):
        seen: dict[Path, None] = {}
        for p in items:
            seen.setdefault(p, None)
        self.items: tuple[Path, ...] = tuple(seen)
        self._set = frozenset(self.items)

    def __or__(self, other: "Deps") -> "Deps":
        if not other.items:
            return self
        if not self.items:
            return other
        return Deps(self.items + other.items)

    def __contains__(self, p: object) -> bool:
        return p in self._set

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Deps) and self._set == other._set

    def __hash__(self) -> int:
        return hash(self._set)

    def __repr__(self) -> str:
        return "{" + ", ".join(path_str(p) for p in self.items) + "}"


NO_DEPS = Deps()


def _union(a: Deps, b: Deps) -> Deps:
    return a | b


def _union_all(_op: str, args: tuple) -> Deps:
    out = NO_DEPS
    for a in args:
        out = out | a
    return out


def dep_structure() -> AnnotationStructure:
    """D: sets of locations; inspections add the inspected value's set."""
    return AnnotationStructure(
        name="dependency",
        bottom=NO_DEPS,
        f_const=lambda c: NO_DEPS,
        f_kappa=NO_DEPS,
        f_1=_union,
        f_2=_union,
        f_L=_union,
        f_R=_union,
        f_app=_union,
        f_unroll=_union,
        f_prim=_union_all,
        location=lambda p: Deps((p,)),
    )


def eq_except_at(loc: Path, v1: AValue, v2: AValue) -> bool:
    """v1 ==_loc v2: equal except possibly at parts whose annotation mentions loc."""
    if loc in v1.ann and loc in v2.ann:
        return True
    if v1.ann != v2.ann or type(v1) is not type(v2):
        return False
    if isinstance(v1, AConst):
        return v1.value == v2.value and type(v1.value) is type(v2.value)
    if isinstance(v1, APair):
        return eq_except_at(loc, v1.left, v2.left) and eq_except_at(loc, v1.right, v2.right)
    if isinstance(v1, (AInl, AInr, ARoll)):
        return eq_except_at(loc, v1.value, v2.value)
    if isinstance(v1, AClosure):
        return v1.fun == v2.fun and env_eq_except_at(loc, v1.env, v2.env)
    return False


def env_eq_except_at(loc: Path, g1: Mapping[str, AValue], g2: Mapping[str, AValue]) -> bool:
    return set(g1) == set(g2) and all(eq_except_at(loc, g1[x], g2[x]) for x in g1)


# -------------------------------------------------------------- helpers


STRUCTURES: dict[str, Callable[[], AnnotationStructure]] = {
    "where": where_structure,
    "expression": expr_structure,
    "dependency": dep_structure,
    "trivial": trivial_structure,
}


def initial_env(struct: AnnotationStructure, env: Mapping[str, Value]) -> AEnv:
    """gamma annotated with each node's location, in the structure's terms."""
    from .annot import map_value

    return AEnv((x, map_value(v, lambda p, _n: struct.location(p), (x,))) for x, v in env.items())
