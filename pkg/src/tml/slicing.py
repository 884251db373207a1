"""Disclosure slicing (backward) and obfuscation slicing (forward).

`disclosure_slice(p, T)` pushes an output pattern backwards through a trace
and returns the partial trace and input pattern environment needed to
certify it.  `obfuscation_slice(rho, T)` re-runs a trace on a partial input
and keeps only what can be computed; a hole where a constructor is needed
erases the whole node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .annot import AClosure, AConst, AInl, AInr, APair, ARoll, AValue
from .errors import IncompatiblePatterns, PreconditionError
from .evaluate import eval_primitive
from .patterns import (
    DIAMOND,
    EMPTY_PENV,
    HOLE,
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
    env_join,
    env_leq_values,
    env_restrict,
    is_diamond_free,
    join,
    leq,
    pattern_to_value,
    to_pattern,
)
from .syntax import (
    HOLE as THOLE,
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
    closure_vars,
)


@dataclass(frozen=True)
class Slice:
    """A partial input environment together with a partial trace."""

    env_part: PatternEnv
    trace_part: Trace


# -------------------------------------------------------------- disclosure


def _expand(p: Pattern, shape: type) -> Pattern:
    """Read a diamond as the constructor `shape` with diamond children."""
    if isinstance(p, PDiamond):
        if shape is PPair:
            return PPair(DIAMOND, DIAMOND)
        return shape(DIAMOND)
    if not isinstance(p, shape):
        raise PreconditionError(f"pattern {type(p).__name__} does not fit a {shape.__name__[1:].lower()} trace")
    return p


def _bind(rho: PatternEnv, x: str) -> Pattern:
    return rho.get_pattern(x)


def disclosure_slice(p: Pattern, t: Trace) -> tuple[Trace, PatternEnv]:
    """p, T  -->disc  S, rho."""
    try:
        return _disc(p, t)
    except IncompatiblePatterns as exc:
        raise IncompatiblePatterns(f"trace was not produced by evaluation: {exc}") from None


def _disc(p: Pattern, t: Trace) -> tuple[Trace, PatternEnv]:
    if isinstance(p, PHole):
        return THOLE, EMPTY_PENV
    if isinstance(t, TVar):
        return t, PatternEnv({t.name: p})
    if isinstance(t, TConst):
        if isinstance(p, PConst) and p.value != t.value:
            raise PreconditionError(f"pattern {p.value!r} does not match constant {t.value!r}")
        if not isinstance(p, (PConst, PDiamond)):
            raise PreconditionError("pattern does not fit a constant")
        return t, EMPTY_PENV
    if isinstance(t, TPrim):
        rho = EMPTY_PENV
        args = []
        for a in t.args:
            s, r = _disc(DIAMOND, a)
            args.append(s)
            rho = env_join(rho, r)
        return TPrim(t.op, tuple(args)), rho
    if isinstance(t, TLet):
        s2, rho2 = _disc(p, t.body)
        s1, rho1 = _disc(_bind(rho2, t.var), t.bound)
        return TLet(s1, t.var, s2), env_join(rho1, rho2.without(t.var))
    if isinstance(t, TPair):
        q = _expand(p, PPair)
        s1, r1 = _disc(q.left, t.left)
        s2, r2 = _disc(q.right, t.right)
        return TPair(s1, s2), env_join(r1, r2)
    if isinstance(t, TFst):
        s, r = _disc(PPair(p, HOLE), t.trace)
        return TFst(s), r
    if isinstance(t, TSnd):
        s, r = _disc(PPair(HOLE, p), t.trace)
        return TSnd(s), r
    if isinstance(t, (TInl, TInr, TRoll)):
        shape = {TInl: PInl, TInr: PInr, TRoll: PRoll}[type(t)]
        q = _expand(p, shape)
        s, r = _disc(q.pat, t.trace)
        return type(t)(s, t.ty), r
    if isinstance(t, TUnroll):
        s, r = _disc(PRoll(p), t.trace)
        return TUnroll(s), r
    if isinstance(t, TCase):
        s1, rho1 = _disc(p, t.branch)
        inner = _bind(rho1, t.var)
        scrut_p = PInl(inner) if t.side == "inl" else PInr(inner)
        s0, rho0 = _disc(scrut_p, t.scrut)
        return TCase(t.match, t.side, s0, s1), env_join(rho0, rho1.without(t.var))
    if isinstance(t, TFun):
        if isinstance(p, PDiamond):
            return t, PatternEnv({x: DIAMOND for x in closure_vars(t.fun)})
        if not isinstance(p, PClosure) or p.fun != t.fun:
            raise PreconditionError(f"pattern does not fit the closure of {t.fun.name}")
        return t, PatternEnv(p.env)
    if isinstance(t, TApp):
        s, rho = _disc(p, t.body)
        p1 = _bind(rho, t.fname)
        p2 = _bind(rho, t.param)
        rho0 = rho.without(t.fname, t.param)
        # every frame discloses which function was called
        fn_p = join(p1, PClosure(t.fun, rho0))
        s1, rho1 = _disc(fn_p, t.fn)
        s2, rho2 = _disc(p2, t.arg)
        return TApp(t.fun, s1, s2, s), env_join(rho1, rho2)
    if isinstance(t, THole):
        raise PreconditionError("cannot slice a hole against a non-hole pattern")
    raise TypeError(f"not a trace: {t!r}")


# ----------------------------------------------------------------- witness


def _shape(v: Value) -> Pattern:
    """v's outermost constructor with hole children."""
    if isinstance(v, VConst):
        return PConst(v.value)
    if isinstance(v, VPair):
        return PPair(HOLE, HOLE)
    if isinstance(v, VInl):
        return PInl(HOLE)
    if isinstance(v, VInr):
        return PInr(HOLE)
    if isinstance(v, VRoll):
        return PRoll(HOLE)
    if isinstance(v, VClosure):
        return PClosure(v.fun, EMPTY_PENV)
    raise TypeError(f"not a value: {v!r}")


def witness(p: Pattern, v: Value) -> Pattern:
    """A part of v that rules out p, and keeps ruling it out when extended."""
    if not is_diamond_free(p):
        raise PreconditionError("witness needs a pattern without '='")
    if leq(p, to_pattern(v)):
        raise PreconditionError("pattern matches the value; there is nothing to witness")
    return _witness(p, v)


def _witness(p: Pattern, v: Value) -> Pattern:
    if isinstance(p, PConst):
        return _shape(v)
    if isinstance(p, PPair) and isinstance(v, VPair):
        if not leq(p.left, to_pattern(v.left)):
            return PPair(_witness(p.left, v.left), HOLE)
        return PPair(HOLE, _witness(p.right, v.right))
    for pc, vc in ((PInl, VInl), (PInr, VInr), (PRoll, VRoll)):
        if isinstance(p, pc) and isinstance(v, vc):
            return pc(_witness(p.pat, v.value))
    if isinstance(p, PClosure) and isinstance(v, VClosure) and p.fun == v.fun:
        for x in closure_vars(v.fun):
            px = p.env.get_pattern(x)
            if not leq(px, to_pattern(v.env[x])):
                return PClosure(v.fun, PatternEnv({x: _witness(px, v.env[x])}))
    return _shape(v)


# -------------------------------------------------------------- disc view


def disc_view(p: Pattern, env: Mapping[str, Value], t: Trace, v: Value) -> Slice:
    """Disc_p(gamma, T, v)."""
    if not is_diamond_free(p):
        raise PreconditionError("disclosure view needs a pattern without '='")
    target = p if leq(p, to_pattern(v)) else witness(p, v)
    s, rho = disclosure_slice(target, t)
    return Slice(env_restrict(env, rho), s)


# ------------------------------------------------------------- obfuscation


def obfuscation_slice(rho: Mapping[str, Pattern], t: Trace) -> tuple[Pattern, Trace]:
    """rho, T  -->obf  p, S."""
    return _obf(PatternEnv(rho), t)


_NONE = (HOLE, THOLE)


def _obf(rho: PatternEnv, t: Trace) -> tuple[Pattern, Trace]:
    if isinstance(t, TVar):
        p = rho.get_pattern(t.name)
        if isinstance(p, PHole):
            return _NONE
        return p, t
    if isinstance(t, TConst):
        return PConst(t.value), t
    if isinstance(t, TPrim):
        vals, parts = [], []
        for a in t.args:
            q, s = _obf(rho, a)
            parts.append(s)
            vals.append(pattern_to_value(q))
        if any(v is None for v in vals):
            return _NONE
        return to_pattern(eval_primitive(t.op, vals)), TPrim(t.op, tuple(parts))
    if isinstance(t, TLet):
        p1, s1 = _obf(rho, t.bound)
        p2, s2 = _obf(rho.set(t.var, p1), t.body)
        return p2, TLet(s1, t.var, s2)
    if isinstance(t, TPair):
        p1, s1 = _obf(rho, t.left)
        p2, s2 = _obf(rho, t.right)
        return PPair(p1, p2), TPair(s1, s2)
    if isinstance(t, (TFst, TSnd)):
        q, s = _obf(rho, t.trace)
        if isinstance(q, PHole):
            return _NONE
        if not isinstance(q, PPair):
            raise PreconditionError("projection of a non-pair pattern")
        return (q.left, TFst(s)) if isinstance(t, TFst) else (q.right, TSnd(s))
    if isinstance(t, (TInl, TInr, TRoll)):
        q, s = _obf(rho, t.trace)
        shape = {TInl: PInl, TInr: PInr, TRoll: PRoll}[type(t)]
        return shape(q), type(t)(s, t.ty)
    if isinstance(t, TUnroll):
        q, s = _obf(rho, t.trace)
        if isinstance(q, PHole):
            return _NONE
        if not isinstance(q, PRoll):
            raise PreconditionError("unroll of a non-roll pattern")
        return q.pat, TUnroll(s)
    if isinstance(t, TCase):
        q, s0 = _obf(rho, t.scrut)
        if isinstance(q, PHole):
            return _NONE
        want = PInl if t.side == "inl" else PInr
        if not isinstance(q, want):
            raise PreconditionError(f"input pattern takes the other branch than the recorded {t.side}")
        p, s1 = _obf(rho.set(t.var, q.pat), t.branch)
        return p, TCase(t.match, t.side, s0, s1)
    if isinstance(t, TFun):
        captured = PatternEnv({x: rho.get_pattern(x) for x in closure_vars(t.fun)})
        return PClosure(t.fun, captured), t
    if isinstance(t, TApp):
        q1, s1 = _obf(rho, t.fn)
        if isinstance(q1, PHole):
            return _NONE
        if not isinstance(q1, PClosure) or q1.fun != t.fun:
            raise PreconditionError(f"input pattern calls a different function than {t.fun.name}")
        q2, s2 = _obf(rho, t.arg)
        inner = q1.env.set(t.fname, q1).set(t.param, q2)
        p, s = _obf(PatternEnv(inner), t.body)
        return p, TApp(t.fun, s1, s2, s)
    if isinstance(t, THole):
        return _NONE
    raise TypeError(f"not a trace: {t!r}")


def obf_view(rho: Mapping[str, Pattern], env: Mapping[str, Value], t: Trace, v: Value) -> tuple[Pattern, Trace]:
    """Obf_rho(gamma, T, v)."""
    rho = PatternEnv(rho)
    if not all(is_diamond_free(q) for q in rho.values()):
        raise PreconditionError("obfuscation view needs patterns without '='")
    if not env_leq_values(rho, env):
        raise PreconditionError("pattern environment does not match the input")
    p, s = obfuscation_slice(rho, t)
    if not leq(p, to_pattern(v)):
        raise PreconditionError("trace is not consistent with the input")
    return p, s


# ------------------------------------------------- extraction from slices


def amatches_mod(p: Pattern, a1: AValue, a2: AValue) -> bool:
    """==_p lifted to annotated values: annotations count at every pattern node."""
    if isinstance(p, PHole):
        return True
    if isinstance(p, PDiamond):
        return a1 == a2
    if a1.ann != a2.ann:
        return False
    if isinstance(p, PConst):
        return isinstance(a1, AConst) and isinstance(a2, AConst) and a1.value == p.value == a2.value
    if isinstance(p, PPair):
        return (
            isinstance(a1, APair)
            and isinstance(a2, APair)
            and amatches_mod(p.left, a1.left, a2.left)
            and amatches_mod(p.right, a1.right, a2.right)
        )
    for pc, ac in ((PInl, AInl), (PInr, AInr), (PRoll, ARoll)):
        if isinstance(p, pc):
            return isinstance(a1, ac) and isinstance(a2, ac) and amatches_mod(p.pat, a1.value, a2.value)
    if isinstance(p, PClosure):
        return (
            isinstance(a1, AClosure)
            and isinstance(a2, AClosure)
            and a1.fun == p.fun == a2.fun
            and env_amatches_mod(p.env, a1.env, a2.env)
        )
    raise TypeError(f"not a pattern: {p!r}")


def env_amatches_mod(rho: Mapping[str, Pattern], g1: Mapping[str, AValue], g2: Mapping[str, AValue]) -> bool:
    for x, p in rho.items():
        if isinstance(p, PHole):
            continue
        if x not in g1 or x not in g2 or not amatches_mod(p, g1[x], g2[x]):
            return False
    return True


def extraction_from_slice_check(struct, p: Pattern, t: Trace, env_hat: Mapping[str, AValue],
                                t2: Trace, env_hat2: Mapping[str, AValue]) -> bool:
    """F(T, gamma^) ==_p F(T', gamma^') whenever T' extends the slice of T and the inputs agree on rho."""
    from .extract import extract
    from .syntax import trace_leq

    s, rho = disclosure_slice(p, t)
    if not trace_leq(s, t2):
        raise PreconditionError("second trace does not extend the slice")
    if not env_amatches_mod(rho, env_hat, env_hat2):
        raise PreconditionError("annotated inputs differ on the slice's environment")
    return amatches_mod(p, extract(struct, t, env_hat), extract(struct, t2, env_hat2))
