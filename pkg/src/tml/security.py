"""Brute-force checks of disclosure and obfuscation over finite universes.

A universe is any finite iterable of traces; views (P) and queries (Q, q)
are plain functions.  The checks group traces by their view so each is
linear in the size of the universe.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence, TypeVar

from .errors import EvalError, FuelExhausted
from .evaluate import evaluate
from .patterns import Pattern, PatternEnv, env_leq_values, leq_value
from .syntax import (
    INT,
    UNIT,
    UNIT_T,
    Env,
    Expr,
    Trace,
    TyProd,
    TySum,
    Type,
    Value,
    VConst,
    VInl,
    VInr,
    VPair,
)

Tr = TypeVar("Tr")
Omega = TypeVar("Omega", bound=Hashable)

TraceQuery = Callable[[Tr], bool]
ProvView = Callable[[Tr], Omega]
ProvQuery = Callable[[Omega], bool]


def _fibers(universe: Iterable[Tr], view: ProvView) -> dict:
    groups: dict = defaultdict(list)
    for t in universe:
        groups[view(t)].append(t)
    return groups


def check_disclosure(universe: Iterable[Tr], view: ProvView, query: TraceQuery) -> bool:
    """P(t) = P(t') implies Q(t) = Q(t')."""
    return all(len({bool(query(t)) for t in ts}) <= 1 for ts in _fibers(universe, view).values())


def check_obfuscation(universe: Iterable[Tr], view: ProvView, query: TraceQuery) -> bool:
    """Every t has some t' with the same view and a different answer."""
    return all(len({bool(query(t)) for t in ts}) == 2 for ts in _fibers(universe, view).values())


def check_positive_disclosure(universe: Iterable[Tr], view: ProvView, query: TraceQuery,
                              prov_query: ProvQuery) -> bool:
    """q(P(t)) = 1 implies Q(t) = 1."""
    return all(query(t) for t in universe if prov_query(view(t)))


def check_negative_disclosure(universe: Iterable[Tr], view: ProvView, query: TraceQuery,
                              prov_query: ProvQuery) -> bool:
    """q(P(t)) = 0 implies Q(t) = 0."""
    return all(not query(t) for t in universe if not prov_query(view(t)))


def _obfuscates(universe: Iterable[Tr], view: ProvView, query: TraceQuery, answer: bool) -> bool:
    for ts in _fibers(universe, view).values():
        answers = {bool(query(t)) for t in ts}
        if answer in answers and (not answer) not in answers:
            return False
    return True


def check_positive_obfuscation(universe: Iterable[Tr], view: ProvView, query: TraceQuery) -> bool:
    """Every t with Q(t) = 1 shares its view with some t' where Q(t') = 0."""
    return _obfuscates(universe, view, query, True)


def check_negative_obfuscation(universe: Iterable[Tr], view: ProvView, query: TraceQuery) -> bool:
    """Every t with Q(t) = 0 shares its view with some t' where Q(t') = 1."""
    return _obfuscates(universe, view, query, False)


def disclosure_counterexample(universe: Iterable[Tr], view: ProvView, query: TraceQuery):
    """A pair (t, t') with equal views and different answers, or None."""
    for ts in _fibers(universe, view).values():
        yes = [t for t in ts if query(t)]
        no = [t for t in ts if not query(t)]
        if yes and no:
            return yes[0], no[0]
    return None


# ------------------------------------------------------------------ strings


def strings(alphabet: str = "ab", max_len: int = 8, min_len: int = 0) -> list[str]:
    """Every string over `alphabet` with length in [min_len, max_len]."""
    out = []
    for n in range(min_len, max_len + 1):
        out.extend("".join(p) for p in itertools.product(alphabet, repeat=n))
    return out


def all_to_a(s: str) -> str:
    return "a" * len(s)


def delete_a(s: str) -> str:
    return s.replace("a", "")


def delete_alternates(s: str) -> str:
    """Keep the symbols at odd positions (the 2nd, 4th, ...)."""
    return s[1::2]


def a_to_b(s: str) -> str:
    return s.replace("a", "b")


def even_b(s: str) -> bool:
    return s.count("b") % 2 == 0


def odd_a(s: str) -> bool:
    return s.count("a") % 2 == 1


def no_abab(s: str) -> bool:
    return "abab" not in s


def no_aa_no_bb(s: str) -> bool:
    return "aa" not in s and "bb" not in s


# ---------------------------------------------------------------- triples


@dataclass(frozen=True)
class TmlTriple:
    """A consistent triple (gamma, T, v)."""

    env: Env
    trace: Trace
    value: Value


def in_query(rho: Mapping[str, Pattern] | Callable[[Env], bool]) -> TraceQuery:
    """IN_rho: the input matches rho.  A callable is taken as a general predicate."""
    if callable(rho) and not isinstance(rho, Mapping):
        return lambda tr: bool(rho(tr.env))
    penv = PatternEnv(rho)
    return lambda tr: env_leq_values(penv, tr.env)


def out_query(p: Pattern | Callable[[Value], bool]) -> TraceQuery:
    """OUT_p: the output matches p.  A callable is taken as a general predicate."""
    if callable(p) and not isinstance(p, Pattern):
        return lambda tr: bool(p(tr.value))
    return lambda tr: leq_value(p, tr.value)


def values_of_type(ty: Type, domain: Sequence[int]) -> list[Value]:
    """All values of a first-order, non-recursive type over an int domain."""
    if ty == INT:
        return [VConst(n) for n in domain]
    if ty == UNIT_T:
        return [VConst(UNIT)]
    if isinstance(ty, TyProd):
        return [VPair(a, b) for a in values_of_type(ty.left, domain) for b in values_of_type(ty.right, domain)]
    if isinstance(ty, TySum):
        return [VInl(a) for a in values_of_type(ty.left, domain)] + [
            VInr(b) for b in values_of_type(ty.right, domain)
        ]
    raise ValueError(f"cannot enumerate values of type {ty!r}")


def environments(free_var_types: Mapping[str, Type], domain: Sequence[int],
                 fixed: Mapping[str, Value] | None = None) -> Iterator[Env]:
    names = list(free_var_types)
    choices = [values_of_type(free_var_types[x], domain) for x in names]
    for combo in itertools.product(*choices):
        yield Env({**(fixed or {}), **dict(zip(names, combo))})


def enumerate_triples(e: Expr, base_domain: Sequence[int], free_var_types: Mapping[str, Type],
                      fixed: Mapping[str, Value] | None = None, fuel: int | None = None) -> list[TmlTriple]:
    """Evaluate e in every environment drawn from the domain."""
    out = []
    for env in environments(free_var_types, base_domain, fixed):
        try:
            v, t = evaluate(env, e, fuel)
        except FuelExhausted as exc:
            raise FuelExhausted(f"{exc} for environment {dict(env)!r}") from None
        except EvalError:
            continue
        out.append(TmlTriple(env, t, v))
    return out


__all__ = [
    "TmlTriple",
    "a_to_b",
    "all_to_a",
    "check_disclosure",
    "check_negative_disclosure",
    "check_negative_obfuscation",
    "check_obfuscation",
    "check_positive_disclosure",
    "check_positive_obfuscation",
    "delete_a",
    "delete_alternates",
    "disclosure_counterexample",
    "enumerate_triples",
    "environments",
    "even_b",
    "in_query",
    "no_aa_no_bb",
    "no_abab",
    "odd_a",
    "out_query",
    "strings",
    "values_of_type",
]
