"""Toplevel sessions: declarations, tracing, provenance queries and slicing.

A labeled literal `e@L` is lifted into a synthetic variable `@L` bound to
the literal's value, so label L is the location (path) `@L`.  Value
bindings keep where-provenance annotations (a path or None on every node),
which are converted to each provenance instance when a trace is queried.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Any, Callable, Union

from .annot import (
    AEnv,
    AValue,
    annotate_uniform,
    erase,
    erase_env,
    map_env_annotations,
    occ,
    path_str,
    with_ann,
)
from .errors import ParseError, TmlError, TypeCheckError
from .evaluate import Fuel, default_fuel, evaluate
from .extract import (
    EBOT,
    NO_DEPS,
    Deps,
    ELoc,
    dep_structure,
    expr_structure,
    extract,
    where_structure,
)
from .parser import parse_expr, parse_pattern, parse_pattern_env
from .patterns import PatternEnv, pattern_to_value, to_pattern
from .prelude import prelude_expr
from .pretty import (
    pretty_annotated,
    pretty_expr,
    pretty_pattern,
    pretty_pattern_env,
    pretty_term,
    pretty_trace,
    pretty_type,
    pretty_value,
)
from .replay import replay
from .serialize import TraceDocument, deserialize_trace, encode, serialize_trace
from .slicing import disc_view, obfuscation_slice
from .syntax import (
    App,
    Case,
    Env,
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
    Trace,
    Type,
    TypeEnv,
    Unroll,
    Value,
    Var,
    free_vars,
)
from .typecheck import check_expr, check_expr_labels

LABEL_PREFIX = "@"


def label_var(label: str) -> str:
    return LABEL_PREFIX + label


def location_name(path: tuple) -> str:
    """Render a location: `@L` paths print as the label L."""
    if path and isinstance(path[0], str) and path[0].startswith(LABEL_PREFIX):
        head = path[0][len(LABEL_PREFIX):]
        return ".".join([head, *(str(s) for s in path[1:])])
    return path_str(path)


# ---------------------------------------------------------------- bindings


@dataclass(frozen=True)
class ValueBinding:
    value: AValue  # where-annotated
    type: Type | None


@dataclass(frozen=True)
class TraceBinding:
    expr: Expr | None
    env: Env
    wenv: AEnv
    trace: Trace
    value: Value
    type: Type | None
    type_env: TypeEnv
    labels: tuple  # label names, in registration order


@dataclass(frozen=True)
class AnnotatedBinding:
    value: AValue
    kind: str


Binding = Union[ValueBinding, TraceBinding, AnnotatedBinding]


class SessionError(TmlError):
    pass


_KINDS = ("where", "dependency", "expression")


@dataclass
class Session:
    fuel: int | None = None
    annot_style: str = "braced"
    output_format: str = "pretty"
    bindings: dict[str, Binding] = field(default_factory=dict)
    labels: dict[str, ValueBinding] = field(default_factory=dict)
    load_prelude: bool = True

    def __post_init__(self) -> None:
        if self.fuel is None:
            self.fuel = default_fuel()
        if self.load_prelude:
            for name in ("map",):
                e = prelude_expr(name)
                v, _ = evaluate(Env(), e)
                self.bindings[name] = ValueBinding(annotate_uniform(v, None), check_expr({}, e))

    # ------------------------------------------------------ environments

    def _value_items(self) -> dict[str, ValueBinding]:
        out = {x: b for x, b in self.bindings.items() if isinstance(b, ValueBinding)}
        out.update({label_var(k): b for k, b in self.labels.items()})
        return out

    def wenv(self) -> AEnv:
        return AEnv((x, b.value) for x, b in self._value_items().items())

    def type_env(self) -> dict[str, Type]:
        return {x: b.type for x, b in self._value_items().items() if b.type is not None}

    def resolve(self, name: str):
        b = self.bindings.get(name)
        if isinstance(b, ValueBinding):
            return to_pattern(erase(b.value))
        raise SessionError(f"{name} is not bound to a value")

    def _get(self, name: str) -> Binding:
        if name not in self.bindings:
            raise SessionError(f"unbound name: {name}")
        return self.bindings[name]

    def _trace(self, name: str) -> TraceBinding:
        b = self._get(name)
        if not isinstance(b, TraceBinding):
            raise SessionError(f"{name} is not a trace")
        return b

    # --------------------------------------------------------- labels

    def _lift(self, e: Expr, types: dict[str, Type]) -> Expr:
        """Replace each labeled literal by its synthetic variable."""
        if isinstance(e, Labeled):
            inner = self._lift(e.expr, types)
            wenv = self.wenv()
            missing = free_vars(inner) - set(wenv)
            if missing:
                raise SessionError(f"unbound variable in labeled literal: {sorted(missing)[0]}")
            v, t = evaluate(erase_env(wenv), inner, Fuel(self.fuel))
            av = extract(where_structure(), t, wenv)
            self.labels[e.label] = ValueBinding(with_ann(av, (label_var(e.label),)), types.get(e.label))
            return Var(label_var(e.label))
        return _map_children(e, lambda c: self._lift(c, types))

    def _prepare(self, text: str) -> tuple[Expr, Type]:
        e = parse_expr(text)
        ty, label_types = check_expr_labels(self.type_env(), e)
        for label in label_types:
            # a reused label starts a fresh location; older traces keep theirs
            self.labels.pop(label, None)
        return self._lift(e, label_types), ty

    def _run(self, e: Expr) -> tuple[Env, AEnv, Value, Trace]:
        wenv = self.wenv()
        fv = free_vars(e)
        missing = fv - set(wenv)
        if missing:
            raise SessionError(f"unbound variable: {sorted(missing)[0]}")
        wenv = AEnv((x, w) for x, w in wenv.items() if x in fv)
        env = erase_env(wenv)
        v, t = evaluate(env, e, Fuel(self.fuel))
        return env, wenv, v, t

    # ------------------------------------------------------- commands

    def execute(self, line: str) -> str:
        """Run one command and return its output (possibly empty)."""
        line = line.strip()
        if line.startswith("- "):
            line = line[2:].strip()
        while line.endswith(";"):
            line = line[:-1].rstrip()
        if not line or line.startswith("#"):
            return ""
        if line.startswith(":"):
            return self._meta(line)
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        m = re.fullmatch(r"val\s+([A-Za-z_][A-Za-z0-9_']*)\s*=\s*(.+)", line, re.S)
        if m:
            return self._bind(m.group(1), m.group(2).strip())
        if head == "fun":
            e = parse_expr(line)
            assert isinstance(e, Fun)
            return self._bind_expr(e.name, line)
        return self._bind("it", line)

    def _bind(self, name: str, rhs: str) -> str:
        word, _, arg = rhs.partition(" ")
        if rhs.startswith("trace(") or word == "trace":
            return self._trace_cmd(name, rhs[len("trace"):].strip())
        if word in _KINDS:
            return self._provenance(name, word, arg.strip())
        if word == "slice":
            return self._slice(arg.strip())
        if word == "obfuscate":
            return self._obfuscate(arg.strip())
        if word == "replay":
            return self._replay(name, arg.strip())
        return self._bind_expr(name, rhs)

    def _bind_expr(self, name: str, text: str) -> str:
        e, ty = self._prepare(text)
        _env, wenv, v, t = self._run(e)
        av = extract(where_structure(), t, wenv)
        self.bindings[name] = ValueBinding(av, ty)
        return f"val {name} = {pretty_value(v)} : {pretty_type(ty)}"

    def _trace_cmd(self, name: str, text: str) -> str:
        e, ty = self._prepare(text)
        env, wenv, v, t = self._run(e)
        used = {a.ann for a in occ(wenv) if a.ann is not None}
        labels = tuple(lab for lab in self.labels if (label_var(lab),) in used)
        tenv = TypeEnv((x, ty_) for x, ty_ in self.type_env().items()
                       if x in env or x in {label_var(lab) for lab in labels})
        b = TraceBinding(e, env, wenv, t, v, ty, tenv, labels)
        self.bindings[name] = b
        return f"val {name} = <trace> : {self.trace_type(b)}"

    def trace_type(self, b: TraceBinding) -> str:
        parts = []
        for lab in b.labels:
            lt = b.type_env.get(label_var(lab))
            parts.append(f"{lab}:{pretty_type(lt) if lt is not None else '_'}")
        res = pretty_type(b.type) if b.type is not None else "_"
        return "({" + ",".join(parts) + "}, " + res + ") trace"

    def provenance(self, name: str, kind: str) -> AValue:
        b = self._trace(name)
        if kind == "where":
            return extract(where_structure(), b.trace, b.wenv, Fuel(self.fuel))
        if kind == "dependency":
            env = map_env_annotations(b.wenv, lambda a: NO_DEPS if a is None else Deps((a,)))
            return extract(dep_structure(), b.trace, env, Fuel(self.fuel))
        env = map_env_annotations(b.wenv, lambda a: EBOT if a is None else ELoc(a))
        return extract(expr_structure(), b.trace, env, Fuel(self.fuel))

    def render(self, av: AValue, kind: str) -> str:
        if kind == "where":
            show: Callable[[Any], str | None] = lambda a: None if a is None else location_name(a)
        elif kind == "dependency":
            show = lambda a: ",".join(location_name(p) for p in a) if len(a) else None
        else:
            show = lambda a: None if a == EBOT else pretty_term(a, location_name)
        return pretty_annotated(av, show, self.annot_style)

    def _provenance(self, name: str, kind: str, target: str) -> str:
        av = self.provenance(target, kind)
        self.bindings[name] = AnnotatedBinding(av, kind)
        return f"val {name} = {self.render(av, kind)}"

    def _split_target(self, arg: str) -> tuple[str, str]:
        m = re.match(r"([A-Za-z_][A-Za-z0-9_']*)\s*(.*)", arg, re.S)
        if not m:
            raise SessionError("expected the name of a trace")
        return m.group(1), m.group(2).strip()

    def show_trace(self, t: Trace) -> str:
        return encode(t) if self.output_format == "canonical" else pretty_trace(t)

    def _slice(self, arg: str) -> str:
        name, pat_text = self._split_target(arg)
        b = self._trace(name)
        if not pat_text:
            raise SessionError("slice needs a pattern")
        p = parse_pattern(pat_text, self.resolve)
        sl = disc_view(p, b.env, b.trace, b.value)
        return f"S = {self.show_trace(sl.trace_part)}\nrho = {pretty_pattern_env(sl.env_part)}"

    def _obfuscate(self, arg: str) -> str:
        name, env_text = self._split_target(arg)
        b = self._trace(name)
        hide = parse_pattern_env(env_text or "[]", self.resolve)
        rho = {x: to_pattern(v) for x, v in b.env.items()}
        for x in _entry_names(env_text):
            rho[_input_name(b, x, name)] = hide.get_pattern(x)
        p, s = obfuscation_slice(PatternEnv(rho), b.trace)
        return f"p = {pretty_pattern(p)}\nS = {self.show_trace(s)}"

    def _replay(self, name: str, arg: str) -> str:
        target, env_text = self._split_target(arg)
        b = self._trace(target)
        env = b.env
        if env_text:
            overrides = parse_pattern_env(env_text, self.resolve)
            for x in _entry_names(env_text):
                v = pattern_to_value(overrides.get_pattern(x))
                if v is None:
                    raise SessionError(f"override for {x} must be a complete value")
                env = env.set(_input_name(b, x, target), v)
        v = replay(env, b.trace, Fuel(self.fuel))
        self.bindings[name] = ValueBinding(annotate_uniform(v, None), b.type)
        suffix = f" : {pretty_type(b.type)}" if b.type is not None else ""
        return f"val {name} = {pretty_value(v)}{suffix}"

    # -------------------------------------------------- meta commands

    def _meta(self, line: str) -> str:
        cmd, _, arg = line.partition(" ")
        arg = arg.strip()
        if cmd == ":type":
            e = parse_expr(arg)
            return f"{pretty_expr(e)} : {pretty_type(check_expr_labels(self.type_env(), e)[0])}"
        if cmd == ":fuel":
            if not arg:
                return f"fuel = {self.fuel}"
            try:
                n = int(arg)
            except ValueError:
                raise SessionError("fuel must be an integer") from None
            if n < 1:
                raise SessionError("fuel must be positive")
            self.fuel = n
            return f"fuel = {n}"
        if cmd == ":annot-style":
            if arg not in ("braced", "bare"):
                raise SessionError("annotation style is braced or bare")
            self.annot_style = arg
            return ""
        if cmd == ":show":
            b = self._trace(arg or "it")
            return self.show_trace(b.trace)
        if cmd == ":save":
            return self._save(arg)
        if cmd == ":load":
            return self._load(arg)
        raise SessionError(f"unknown command {cmd}")

    def document(self, name: str) -> TraceDocument:
        b = self._trace(name)
        return TraceDocument(
            trace=b.trace,
            env=b.env,
            type_env=b.type_env,
            annotated_env=b.wenv,
            labels=tuple((lab, (label_var(lab),)) for lab in b.labels),
            value=b.value,
            result_type=b.type,
        )

    def _save(self, arg: str) -> str:
        parts = arg.split()
        if not parts:
            raise SessionError(":save needs a file name")
        name = parts[1] if len(parts) > 1 else "it"
        FilePath(parts[0]).write_bytes(serialize_trace(self.document(name)))
        return f"saved {name} to {parts[0]}"

    def _load(self, arg: str) -> str:
        parts = arg.split()
        if not parts:
            raise SessionError(":load needs a file name")
        name = parts[1] if len(parts) > 1 else "it"
        try:
            data = FilePath(parts[0]).read_bytes()
        except OSError as exc:
            raise SessionError(f"cannot read {parts[0]}: {exc.strerror}") from None
        doc = deserialize_trace(data)
        env = doc.env if doc.env is not None else Env()
        wenv = doc.annotated_env if doc.annotated_env is not None else AEnv(
            (x, annotate_uniform(v, None)) for x, v in env.items()
        )
        value = doc.value if doc.value is not None else replay(env, doc.trace)
        b = TraceBinding(
            None, env, wenv, doc.trace, value, doc.result_type,
            doc.type_env if doc.type_env is not None else TypeEnv(),
            tuple(lab for lab, _ in doc.labels),
        )
        self.bindings[name] = b
        return f"val {name} = <trace> : {self.trace_type(b)}"


def _input_name(b: TraceBinding, x: str, trace_name: str) -> str:
    """An input of the trace, where a label L names the input `@L`."""
    for candidate in (x, label_var(x)):
        if candidate in b.env:
            return candidate
    raise SessionError(f"{x} is not an input of {trace_name}")


def _entry_names(text: str) -> list[str]:
    """Top-level names bound in a pattern environment text, `x=_` included."""
    depth, top = 0, []
    for ch in text.strip()[1:-1]:
        if ch in "([<":
            depth += 1
        elif ch in ")]>":
            depth -= 1
        top.append(ch if depth == 0 else " ")
    return re.findall(r"([A-Za-z_][A-Za-z0-9_']*)\s*=(?!=)", "".join(top))


def _map_children(e: Expr, fn: Callable[[Expr], Expr]) -> Expr:
    if isinstance(e, (Var,)) or not hasattr(e, "__dataclass_fields__"):
        return e
    if isinstance(e, Prim):
        return Prim(e.op, tuple(fn(a) for a in e.args))
    if isinstance(e, Let):
        return Let(e.var, fn(e.bound), fn(e.body))
    if isinstance(e, Pair):
        return Pair(fn(e.left), fn(e.right))
    if isinstance(e, (Fst, Snd, Unroll)):
        return type(e)(fn(e.expr))
    if isinstance(e, (Inl, Inr, Roll)):
        return type(e)(fn(e.expr), e.ty)
    if isinstance(e, Case):
        m = e.match
        return Case(fn(e.scrut), Match(m.var1, fn(m.branch1), m.var2, fn(m.branch2), m.sugar))
    if isinstance(e, Fun):
        return Fun(e.name, e.param, fn(e.body), e.param_ty, e.ret_ty, e.tyenv)
    if isinstance(e, App):
        return App(fn(e.fn), fn(e.arg))
    return e


@dataclass
class Transcript:
    lines: list[str] = field(default_factory=list)
    errors: int = 0


def run_script(session: Session, commands: list[str], keep_going: bool = False,
               echo: bool = True) -> tuple[Transcript, bool]:
    """Run commands in order; stop at the first error unless keep_going."""
    out = Transcript()
    for cmd in commands:
        stripped = cmd.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if echo:
            out.lines.append(stripped if stripped.startswith("- ") else f"- {stripped}")
        try:
            text = session.execute(stripped)
        except (TmlError, RecursionError) as exc:
            out.errors += 1
            out.lines.append(f"error: {exc}")
            if not keep_going:
                return out, False
            continue
        if text:
            out.lines.extend(text.split("\n"))
    return out, True


def join_continuations(lines: list[str]) -> list[str]:
    """Merge lines ending in a backslash with the following line."""
    out: list[str] = []
    buf = ""
    for raw in lines:
        line = raw.rstrip("\n")
        if buf:
            line = line.lstrip()
        if line.endswith("\\"):
            buf += line[:-1].rstrip() + " "
            continue
        out.append(buf + line)
        buf = ""
    if buf:
        out.append(buf)
    return out


__all__ = [
    "AnnotatedBinding",
    "Session",
    "SessionError",
    "TraceBinding",
    "Transcript",
    "ValueBinding",
    "join_continuations",
    "label_var",
    "location_name",
    "run_script",
    "ParseError",
    "TypeCheckError",
]
