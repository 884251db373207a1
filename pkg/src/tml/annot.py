"""Annotated values, erasure, occurrence sets and paths.

An annotated value carries one annotation on every node.  Paths address
parts of an environment: a variable first, then steps 1 and 2 into pairs,
step 1 into injections and `roll`, and step 1 from a closure into its
environment (followed by a variable).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Union

from .errors import PathMismatch
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
)

Step = Union[str, int]
Path = tuple  # tuple[Step, ...]; () is the empty path
EPSILON: Path = ()


def path_str(path: Path) -> str:
    return ".".join(str(s) for s in path) if path else "ε"


def parse_path(text: str) -> Path:
    """Inverse of path_str: `x.1.2` -> ("x", 1, 2)."""
    if text in ("", "ε"):
        return EPSILON
    out: list[Step] = []
    for part in text.split("."):
        out.append(int(part) if part.isdigit() else part)
    return tuple(out)


class AValue:
    """w^a: an annotated value node."""

    __slots__ = ()
    ann: Any


@dataclass(frozen=True)
class AConst(AValue):
    value: Constant
    ann: Any = None


@dataclass(frozen=True)
class APair(AValue):
    left: AValue
    right: AValue
    ann: Any = None


@dataclass(frozen=True)
class AInl(AValue):
    value: AValue
    ann: Any = None


@dataclass(frozen=True)
class AInr(AValue):
    value: AValue
    ann: Any = None


@dataclass(frozen=True)
class ARoll(AValue):
    value: AValue
    ann: Any = None


@dataclass(frozen=True)
class AClosure(AValue):
    fun: Fun
    env: "AEnv"
    ann: Any = None


class AEnv(FrozenMap[str, AValue]):
    """An annotated environment."""

    __slots__ = ()

    def lookup(self, name: str) -> AValue:
        from .errors import UnboundVariable

        try:
            return self._d[name]
        except KeyError:
            raise UnboundVariable(name) from None


_UNARY = (AInl, AInr, ARoll)


def with_ann(v: AValue, a: Any) -> AValue:
    """Replace the top-level annotation."""
    if isinstance(v, AConst):
        return AConst(v.value, a)
    if isinstance(v, APair):
        return APair(v.left, v.right, a)
    if isinstance(v, _UNARY):
        return type(v)(v.value, a)
    if isinstance(v, AClosure):
        return AClosure(v.fun, v.env, a)
    raise TypeError(f"not an annotated value: {v!r}")


# ---------------------------------------------------------------- erasure


def erase(v: AValue) -> Value:
    if isinstance(v, AConst):
        return VConst(v.value)
    if isinstance(v, APair):
        return VPair(erase(v.left), erase(v.right))
    if isinstance(v, AInl):
        return VInl(erase(v.value))
    if isinstance(v, AInr):
        return VInr(erase(v.value))
    if isinstance(v, ARoll):
        return VRoll(erase(v.value))
    if isinstance(v, AClosure):
        return VClosure(v.fun, erase_env(v.env))
    raise TypeError(f"not an annotated value: {v!r}")


def erase_env(env: Mapping[str, AValue]) -> Env:
    return Env((x, erase(v)) for x, v in env.items())


def annotate_uniform(v: Value, a: Any) -> AValue:
    """Annotate every node of v with the same annotation."""
    return map_value(v, lambda _path, _node: a)


def map_value(v: Value, fn: Callable[[Path, Value], Any], base: Path = EPSILON) -> AValue:
    """Annotate each node with fn(path relative to base, node)."""
    a = fn(base, v)
    if isinstance(v, VConst):
        return AConst(v.value, a)
    if isinstance(v, VPair):
        return APair(map_value(v.left, fn, base + (1,)), map_value(v.right, fn, base + (2,)), a)
    if isinstance(v, VInl):
        return AInl(map_value(v.value, fn, base + (1,)), a)
    if isinstance(v, VInr):
        return AInr(map_value(v.value, fn, base + (1,)), a)
    if isinstance(v, VRoll):
        return ARoll(map_value(v.value, fn, base + (1,)), a)
    if isinstance(v, VClosure):
        env = AEnv((x, map_value(w, fn, base + (1, x))) for x, w in v.env.items())
        return AClosure(v.fun, env, a)
    raise TypeError(f"not a value: {v!r}")


def map_annotations(v: AValue, fn: Callable[[Any], Any]) -> AValue:
    """Apply fn to every annotation."""
    a = fn(v.ann)
    if isinstance(v, AConst):
        return AConst(v.value, a)
    if isinstance(v, APair):
        return APair(map_annotations(v.left, fn), map_annotations(v.right, fn), a)
    if isinstance(v, _UNARY):
        return type(v)(map_annotations(v.value, fn), a)
    if isinstance(v, AClosure):
        return AClosure(v.fun, map_env_annotations(v.env, fn), a)
    raise TypeError(f"not an annotated value: {v!r}")


def map_env_annotations(env: Mapping[str, AValue], fn: Callable[[Any], Any]) -> AEnv:
    return AEnv((x, map_annotations(v, fn)) for x, v in env.items())


# ------------------------------------------------------------ occurrences


def occ(v: AValue | Mapping[str, AValue]) -> set[AValue]:
    """All annotated subvalues, including the root (and closure contents)."""
    out: set[AValue] = set()
    stack: list[AValue] = list(v.values()) if isinstance(v, Mapping) else [v]
    while stack:
        node = stack.pop()
        out.add(node)
        if isinstance(node, APair):
            stack.extend((node.left, node.right))
        elif isinstance(node, _UNARY):
            stack.append(node.value)
        elif isinstance(node, AClosure):
            stack.extend(node.env.values())
    return out


def is_bottom(a: Any, bottom: Any = None) -> bool:
    return a == bottom


def occ_nonbot(v: AValue | Mapping[str, AValue], bottom: Any = None) -> set[AValue]:
    return {w for w in occ(v) if w.ann != bottom}


def annotations(v: AValue | Mapping[str, AValue]) -> list[Any]:
    return [w.ann for w in occ(v)]


# ------------------------------------------------------------------ paths


def path_lookup(subject: Value | Mapping[str, Value], path: Iterable[Step]) -> Value:
    """gamma[pi] or v[pi]."""
    steps = tuple(path)
    cur: Any = subject
    for i, step in enumerate(steps):
        if isinstance(cur, Mapping):
            if not isinstance(step, str) or step not in cur:
                raise PathMismatch(f"no variable {step!r} at {path_str(steps[:i])}")
            cur = cur[step]
            continue
        if isinstance(cur, VPair) and step in (1, 2):
            cur = cur.left if step == 1 else cur.right
        elif isinstance(cur, (VInl, VInr, VRoll)) and step == 1:
            cur = cur.value
        elif isinstance(cur, VClosure) and step == 1:
            cur = cur.env
        else:
            raise PathMismatch(f"step {step!r} does not apply at {path_str(steps[:i]) or 'the root'}")
    if isinstance(cur, Mapping) and not isinstance(subject, Mapping) or (isinstance(cur, Mapping) and steps):
        raise PathMismatch(f"path {path_str(steps)} ends inside a closure environment")
    return cur


def path_annotate(subject: Value | Mapping[str, Value], base: Path = EPSILON) -> AValue | AEnv:
    """Annotate every node with its own path."""
    if isinstance(subject, Mapping):
        return AEnv((x, map_value(v, lambda p, _n: p, base + (x,))) for x, v in subject.items())
    return map_value(subject, lambda p, _n: p, base)


def subvalue_paths(subject: Value | Mapping[str, Value]) -> list[Path]:
    """Every path addressing a node, in preorder."""
    ann = path_annotate(subject)
    out: list[Path] = []

    def walk(v: AValue) -> None:
        out.append(v.ann)
        if isinstance(v, APair):
            walk(v.left)
            walk(v.right)
        elif isinstance(v, _UNARY):
            walk(v.value)
        elif isinstance(v, AClosure):
            for w in v.env.values():
                walk(w)

    if isinstance(ann, AEnv):
        for w in ann.values():
            walk(w)
    else:
        walk(ann)
    return out


def replace_at(env: Mapping[str, AValue], path: Path, new: AValue) -> AEnv:
    """Annotated environment with the node at `path` replaced."""

    def go(v: AValue, rest: Path) -> AValue:
        if not rest:
            return new
        step, tail = rest[0], rest[1:]
        if isinstance(v, APair) and step in (1, 2):
            if step == 1:
                return APair(go(v.left, tail), v.right, v.ann)
            return APair(v.left, go(v.right, tail), v.ann)
        if isinstance(v, _UNARY) and step == 1:
            return type(v)(go(v.value, tail), v.ann)
        if isinstance(v, AClosure) and step == 1 and tail and tail[0] in v.env:
            inner = v.env[tail[0]]
            return AClosure(v.fun, v.env.set(tail[0], go(inner, tail[1:])), v.ann)
        raise PathMismatch(f"cannot follow {path_str(rest)}")

    if not path or path[0] not in env:
        raise PathMismatch(f"no variable at {path_str(path)}")
    return AEnv(env).set(path[0], go(env[path[0]], path[1:]))
