"""Standard definitions available in every session, and the example programs."""

from __future__ import annotations

from functools import lru_cache

from .evaluate import evaluate
from .parser import parse_expr
from .syntax import Env, Expr, Value

# map : (int -> int) -> int list -> int list
MAP_SRC = """
fun map(f: int -> int). fun mapf(xs: int list): int list.
  case unroll xs of
    inl(u). []
  | inr(p). f (fst p) :: map f (snd p)
"""

# reverse of a list of int pairs, with an accumulator
REVERSE_PAIRS_SRC = """
fun rev(xs: (int * int) list). fun go(acc: (int * int) list): (int * int) list.
  case unroll xs of
    inl(u). acc
  | inr(p). rev (snd p) (fst p :: acc)
"""

# f = reverse o map (fn (x,y) => if x < y then (x, y) else (y, x)), with
# the second components rebuilt arithmetically
PAIRS_F_SRC = """
fun f(xs: (int * int) list): (int * int) list.
  let order = fun order(ys: (int * int) list): (int * int) list.
    case unroll ys of
      inl(u). []
    | inr(p). (let (x, y) = fst p in if x < y then (x, y + 0) else (y, x + 0)) :: order (snd p)
  in REV (order xs) []
"""

# g xs: the sum of the first triple, once per element
G_SRC = """
fun g(xs: (int * int * int) list): int list.
  let h = case unroll xs of inl(u). (0, 0, 0) | inr(p). fst p in
  let s = fst h + fst (snd h) + snd (snd h) in
  let each = fun each(ys: (int * int * int) list): int list.
    case unroll ys of
      inl(u). []
    | inr(q). s :: each (snd q)
  in each xs
"""

# h: factorial
H_SRC = "fun h(x: int): int. if x = 0 then 1 else x * h (x - 1)"

# the element function of the running example; y is free
RUNNING_F_SRC = "fun f(x: int): int. if x = y then y else x + 1"


@lru_cache(maxsize=None)
def prelude_expr(name: str) -> Expr:
    src = {
        "map": MAP_SRC,
        "rev": REVERSE_PAIRS_SRC,
        "h": H_SRC,
        "g": G_SRC,
    }[name]
    return parse_expr(src)


def pairs_f_expr() -> Expr:
    return parse_expr(PAIRS_F_SRC.replace("REV", f"({REVERSE_PAIRS_SRC.strip()})"))


@lru_cache(maxsize=None)
def prelude_values() -> dict[str, Value]:
    """Closed prelude bindings, evaluated once."""
    out: dict[str, Value] = {}
    for name, e in (("map", prelude_expr("map")),):
        v, _ = evaluate(Env(), e)
        out[name] = v
    return out


def prelude_env() -> Env:
    return Env(prelude_values())
