"""Partial values (patterns): the order, join, matching and restriction.

A pattern is a value that may contain holes `_` (anything) and the
exact-match marker `=`.  Pattern environments treat absent variables as
holes, and never store hole bindings, so equal environments are equal maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import IncompatiblePatterns, PreconditionError
from .syntax import (
    Constant,
    Env,
    FrozenMap,
    Fun,
    Value,
    VClosure,
    VConst,
    VInl,
    VInr,
    VPair,
    VRoll,
    closure_vars,
)


class Pattern:
    __slots__ = ()


@dataclass(frozen=True)
class PHole(Pattern):
    pass


@dataclass(frozen=True)
class PDiamond(Pattern):
    pass


@dataclass(frozen=True)
class PConst(Pattern):
    value: Constant


@dataclass(frozen=True)
class PPair(Pattern):
    left: Pattern
    right: Pattern


@dataclass(frozen=True)
class PInl(Pattern):
    pat: Pattern


@dataclass(frozen=True)
class PInr(Pattern):
    pat: Pattern


@dataclass(frozen=True)
class PRoll(Pattern):
    pat: Pattern


@dataclass(frozen=True)
class PClosure(Pattern):
    fun: Fun
    env: "PatternEnv"


HOLE = PHole()
DIAMOND = PDiamond()


class PatternEnv(FrozenMap[str, Pattern]):
    """rho: variables to patterns; a missing variable means `_`."""

    __slots__ = ()

    def __init__(self, items: Mapping[str, Pattern] | object = ()):
        super().__init__(items)  # type: ignore[arg-type]
        self._d = {k: v for k, v in self._d.items() if not isinstance(v, PHole)}

    def get_pattern(self, name: str) -> Pattern:
        return self._d.get(name, HOLE)


EMPTY_PENV = PatternEnv()

_UNARY = (PInl, PInr, PRoll)


def _child(p: Pattern) -> Pattern:
    return p.pat  # type: ignore[attr-defined]


# ---------------------------------------------------------- conversions


def to_pattern(v: Value) -> Pattern:
    if isinstance(v, VConst):
        return PConst(v.value)
    if isinstance(v, VPair):
        return PPair(to_pattern(v.left), to_pattern(v.right))
    if isinstance(v, VInl):
        return PInl(to_pattern(v.value))
    if isinstance(v, VInr):
        return PInr(to_pattern(v.value))
    if isinstance(v, VRoll):
        return PRoll(to_pattern(v.value))
    if isinstance(v, VClosure):
        return PClosure(v.fun, env_to_patterns(v.env))
    raise TypeError(f"not a value: {v!r}")


def env_to_patterns(env: Mapping[str, Value]) -> PatternEnv:
    return PatternEnv({k: to_pattern(v) for k, v in env.items()})


def pattern_to_value(p: Pattern) -> Value | None:
    """The value denoted by a complete pattern, or None if it has holes."""
    if isinstance(p, PConst):
        return VConst(p.value)
    if isinstance(p, PPair):
        a, b = pattern_to_value(p.left), pattern_to_value(p.right)
        return None if a is None or b is None else VPair(a, b)
    if isinstance(p, PInl):
        a = pattern_to_value(p.pat)
        return None if a is None else VInl(a)
    if isinstance(p, PInr):
        a = pattern_to_value(p.pat)
        return None if a is None else VInr(a)
    if isinstance(p, PRoll):
        a = pattern_to_value(p.pat)
        return None if a is None else VRoll(a)
    if isinstance(p, PClosure):
        env = {}
        for x in closure_vars(p.fun):
            v = pattern_to_value(p.env.get_pattern(x))
            if v is None:
                return None
            env[x] = v
        return VClosure(p.fun, Env(env))
    return None


def is_diamond_free(p: Pattern) -> bool:
    if isinstance(p, PDiamond):
        return False
    if isinstance(p, PPair):
        return is_diamond_free(p.left) and is_diamond_free(p.right)
    if isinstance(p, _UNARY):
        return is_diamond_free(_child(p))
    if isinstance(p, PClosure):
        return all(is_diamond_free(q) for q in p.env.values())
    return True


def is_complete(p: Pattern) -> bool:
    return pattern_to_value(p) is not None


# ---------------------------------------------------------------- join


def diamond_subst(p: Pattern) -> Pattern:
    """p[=/_]: every hole becomes the exact-match marker."""
    if isinstance(p, PHole):
        return DIAMOND
    if isinstance(p, PPair):
        return PPair(diamond_subst(p.left), diamond_subst(p.right))
    if isinstance(p, _UNARY):
        return type(p)(diamond_subst(_child(p)))
    if isinstance(p, PClosure):
        return PClosure(p.fun, PatternEnv({x: diamond_subst(p.env.get_pattern(x)) for x in closure_vars(p.fun)}))
    return p


def join(p: Pattern, q: Pattern) -> Pattern:
    """p |_| q, or IncompatiblePatterns when no upper bound exists."""
    if isinstance(p, PHole):
        return q
    if isinstance(q, PHole):
        return p
    if isinstance(p, PDiamond):
        return diamond_subst(q)
    if isinstance(q, PDiamond):
        return diamond_subst(p)
    if isinstance(p, PConst) and isinstance(q, PConst):
        if p.value == q.value and type(p.value) is type(q.value):
            return p
        raise IncompatiblePatterns(f"constants {p.value!r} and {q.value!r} differ")
    if isinstance(p, PPair) and isinstance(q, PPair):
        return PPair(join(p.left, q.left), join(p.right, q.right))
    if isinstance(p, _UNARY) and type(p) is type(q):
        return type(p)(join(_child(p), _child(q)))
    if isinstance(p, PClosure) and isinstance(q, PClosure):
        if p.fun != q.fun:
            raise IncompatiblePatterns(f"closures of {p.fun.name} and {q.fun.name} differ")
        return PClosure(p.fun, env_join(p.env, q.env))
    raise IncompatiblePatterns(f"{type(p).__name__} and {type(q).__name__} do not match")


def env_join(r1: Mapping[str, Pattern], r2: Mapping[str, Pattern]) -> PatternEnv:
    out = dict(r1)
    for x, p in r2.items():
        out[x] = join(out[x], p) if x in out else p
    return PatternEnv(out)


def leq(p: Pattern, q: Pattern) -> bool:
    """p <= q  iff  p |_| q = q."""
    try:
        return join(p, q) == q
    except IncompatiblePatterns:
        return False


def leq_value(p: Pattern, v: Value) -> bool:
    return leq(p, to_pattern(v))


def env_leq(rho: Mapping[str, Pattern], other: Mapping[str, Pattern]) -> bool:
    return all(leq(p, other.get(x, HOLE)) for x, p in rho.items())


def env_leq_values(rho: Mapping[str, Pattern], env: Mapping[str, Value]) -> bool:
    for x, p in rho.items():
        if isinstance(p, PHole):
            continue
        if x not in env or not leq_value(p, env[x]):
            return False
    return True


# ------------------------------------------------------------ matching


def matches_mod(p: Pattern, v1: Value, v2: Value) -> bool:
    """v1 ==_p v2: equal at the `=` positions of p, same shape elsewhere."""
    if isinstance(p, PHole):
        return True
    if isinstance(p, PDiamond):
        return v1 == v2
    if isinstance(p, PConst):
        return v1 == VConst(p.value) and v2 == VConst(p.value)
    if isinstance(p, PPair):
        return (
            isinstance(v1, VPair)
            and isinstance(v2, VPair)
            and matches_mod(p.left, v1.left, v2.left)
            and matches_mod(p.right, v1.right, v2.right)
        )
    if isinstance(p, (PInl, PInr, PRoll)):
        cls = {PInl: VInl, PInr: VInr, PRoll: VRoll}[type(p)]
        return isinstance(v1, cls) and isinstance(v2, cls) and matches_mod(p.pat, v1.value, v2.value)
    if isinstance(p, PClosure):
        return (
            isinstance(v1, VClosure)
            and isinstance(v2, VClosure)
            and v1.fun == p.fun == v2.fun
            and env_matches_mod(p.env, v1.env, v2.env)
        )
    raise TypeError(f"not a pattern: {p!r}")


def env_matches_mod(rho: Mapping[str, Pattern], g1: Mapping[str, Value], g2: Mapping[str, Value]) -> bool:
    for x, p in rho.items():
        if isinstance(p, PHole):
            continue
        if x not in g1 or x not in g2 or not matches_mod(p, g1[x], g2[x]):
            return False
    return True


# ---------------------------------------------------------- restriction


def restrict(v: Value, p: Pattern) -> Pattern:
    """v|_p: replace each `=` in p with the corresponding part of v."""
    if isinstance(p, PHole):
        return HOLE
    if isinstance(p, PDiamond):
        return to_pattern(v)
    if isinstance(p, PConst):
        if v != VConst(p.value):
            raise PreconditionError(f"pattern {p!r} does not match {v!r}")
        return p
    if isinstance(p, PPair) and isinstance(v, VPair):
        return PPair(restrict(v.left, p.left), restrict(v.right, p.right))
    if isinstance(p, PInl) and isinstance(v, VInl):
        return PInl(restrict(v.value, p.pat))
    if isinstance(p, PInr) and isinstance(v, VInr):
        return PInr(restrict(v.value, p.pat))
    if isinstance(p, PRoll) and isinstance(v, VRoll):
        return PRoll(restrict(v.value, p.pat))
    if isinstance(p, PClosure) and isinstance(v, VClosure) and p.fun == v.fun:
        return PClosure(p.fun, env_restrict(v.env, p.env))
    raise PreconditionError(f"pattern {p!r} does not match {v!r}")


def env_restrict(env: Mapping[str, Value], rho: Mapping[str, Pattern]) -> PatternEnv:
    out = {}
    for x, p in rho.items():
        if isinstance(p, PHole):
            continue
        if x not in env:
            raise PreconditionError(f"pattern environment mentions unbound {x}")
        out[x] = restrict(env[x], p)
    return PatternEnv(out)


# ------------------------------------------------------------- helpers


def pattern_size(p: Pattern) -> int:
    if isinstance(p, PPair):
        return 1 + pattern_size(p.left) + pattern_size(p.right)
    if isinstance(p, _UNARY):
        return 1 + pattern_size(_child(p))
    if isinstance(p, PClosure):
        return 1 + sum(pattern_size(q) for q in p.env.values())
    return 1


def count_pattern_holes(p: Pattern) -> int:
    if isinstance(p, PHole):
        return 1
    if isinstance(p, PPair):
        return count_pattern_holes(p.left) + count_pattern_holes(p.right)
    if isinstance(p, _UNARY):
        return count_pattern_holes(_child(p))
    if isinstance(p, PClosure):
        return sum(count_pattern_holes(p.env.get_pattern(x)) for x in closure_vars(p.fun))
    return 0
