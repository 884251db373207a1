"""Canonical, versioned text encoding of trace documents.

The encoding is a single s-expression after a header line `tmltrace/1`.
Every node is written as `(Tag field ...)` with fields in declaration
order, so encoding is a function of the value and re-encoding a decoded
document reproduces the input bytes.  The grammar is in docs/trace-format.md.
"""

from __future__ import annotations

import dataclasses
import importlib
import json
import re
from dataclasses import dataclass
from typing import Any

from . import annot, patterns, syntax

# looked up by name: the package namespace re-exports a function `extract`
extract = importlib.import_module(f"{__package__}.extract")
from .errors import SerializationError

MAGIC = "tmltrace"
VERSION = 1
HEADER = f"{MAGIC}/{VERSION}\n"


@dataclass(frozen=True)
class TraceDocument:
    """What a session saves: a trace together with its context."""

    trace: syntax.Trace
    env: syntax.Env | None = None
    type_env: syntax.TypeEnv | None = None
    annotated_env: annot.AEnv | None = None
    labels: tuple = ()  # ((label, path), ...)
    value: syntax.Value | None = None
    result_type: syntax.Type | None = None
    pattern: patterns.Pattern | None = None
    pattern_env: patterns.PatternEnv | None = None
    version: int = VERSION


def _registry() -> dict[str, type]:
    out: dict[str, type] = {}
    for mod in (syntax, patterns, annot, extract):
        for name, obj in vars(mod).items():
            if isinstance(obj, type) and obj.__module__ == mod.__name__:
                if dataclasses.is_dataclass(obj) or issubclass(obj, syntax.FrozenMap):
                    out[name] = obj
    out["Deps"] = extract.Deps
    out["TraceDocument"] = TraceDocument
    for skip in ("PrimSig", "AnnotationStructure"):
        out.pop(skip, None)
    return out


_REGISTRY = _registry()

# ------------------------------------------------------------------ encode


def _encode(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("nil")
    elif obj is True:
        out.append("#t")
    elif obj is False:
        out.append("#f")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, tuple):
        out.append("(tuple")
        for x in obj:
            out.append(" ")
            _encode(x, out)
        out.append(")")
    elif isinstance(obj, extract.Deps):
        out.append("(Deps")
        for p in obj.items:
            out.append(" ")
            _encode(p, out)
        out.append(")")
    elif isinstance(obj, syntax.FrozenMap):
        name = type(obj).__name__
        if name not in _REGISTRY:
            raise SerializationError(f"cannot serialize {name}")
        out.append(f"({name}")
        for k, v in obj.items():
            out.append(" (")
            _encode(k, out)
            out.append(" ")
            _encode(v, out)
            out.append(")")
        out.append(")")
    elif dataclasses.is_dataclass(obj):
        name = type(obj).__name__
        if _REGISTRY.get(name) is not type(obj):
            raise SerializationError(f"cannot serialize {name}")
        out.append(f"({name}")
        for f in dataclasses.fields(obj):
            out.append(" ")
            _encode(getattr(obj, f.name), out)
        out.append(")")
    else:
        raise SerializationError(f"cannot serialize {type(obj).__name__}")


def encode(obj: Any) -> str:
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)


def serialize_trace(doc: TraceDocument) -> bytes:
    return (HEADER + encode(doc) + "\n").encode("utf-8")


# ------------------------------------------------------------------ decode

_TOKEN = re.compile(r'\s+|\(|\)|"(?:[^"\\]|\\.)*"|[^\s()"]+')


class _Reader:
    def __init__(self, text: str, base: int):
        self.text = text
        self.base = base
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise SerializationError("unterminated string", self.offset(pos))
            if not m.group().isspace():
                self.tokens.append((m.group(), pos))
            pos = m.end()
        self.i = 0

    def offset(self, char_pos: int) -> int:
        return self.base + len(self.text[:char_pos].encode("utf-8"))

    def here(self) -> int:
        if self.i < len(self.tokens):
            return self.offset(self.tokens[self.i][1])
        return self.offset(len(self.text))

    def next(self) -> str:
        if self.i >= len(self.tokens):
            raise SerializationError("unexpected end of input", self.here())
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def read(self) -> Any:
        at = self.here()
        tok = self.next()
        if tok == "(":
            return self.read_node(at)
        if tok == ")":
            raise SerializationError("unexpected ')'", at)
        if tok == "nil":
            return None
        if tok == "#t":
            return True
        if tok == "#f":
            return False
        if tok.startswith('"'):
            try:
                return json.loads(tok)
            except ValueError:
                raise SerializationError("bad string literal", at) from None
        if re.fullmatch(r"-?\d+", tok):
            return int(tok)
        raise SerializationError(f"unexpected token {tok!r}", at)

    def read_items(self) -> list[Any]:
        items = []
        while self.peek() != ")":
            if self.peek() is None:
                raise SerializationError("unexpected end of input", self.here())
            items.append(self.read())
        self.next()
        return items

    def read_node(self, at: int) -> Any:
        tag = self.next()
        if tag == "tuple":
            return tuple(self.read_items())
        cls = _REGISTRY.get(tag)
        if cls is None:
            raise SerializationError(f"unknown node tag {tag!r}", at)
        if cls is extract.Deps:
            return extract.Deps(self.read_items())
        if issubclass(cls, syntax.FrozenMap):
            pairs = []
            while self.peek() != ")":
                pat = self.here()
                if self.next() != "(":
                    raise SerializationError("expected a map entry", pat)
                entry = self.read_items()
                if len(entry) != 2 or not isinstance(entry[0], str):
                    raise SerializationError("malformed map entry", pat)
                pairs.append((entry[0], entry[1]))
            self.next()
            return cls(pairs)
        items = self.read_items()
        fields = dataclasses.fields(cls)
        if len(items) != len(fields):
            raise SerializationError(f"{tag} expects {len(fields)} fields, found {len(items)}", at)
        try:
            return cls(*items)
        except (TypeError, ValueError) as exc:
            raise SerializationError(f"malformed {tag}: {exc}", at) from None


def decode(text: str, base: int = 0) -> Any:
    r = _Reader(text, base)
    obj = r.read()
    if r.peek() is not None:
        raise SerializationError("trailing data", r.here())
    return obj


def deserialize_trace(data: bytes) -> TraceDocument:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SerializationError("input is not UTF-8", exc.start) from None
    line, sep, rest = text.partition("\n")
    if not sep or not line.startswith(MAGIC + "/"):
        raise SerializationError("missing tmltrace header", 0)
    version = line[len(MAGIC) + 1:]
    if version != str(VERSION):
        raise SerializationError(f"unsupported version {version!r} (expected {VERSION})", len(MAGIC) + 1)
    doc = decode(rest, len(line.encode("utf-8")) + 1)
    if not isinstance(doc, TraceDocument):
        raise SerializationError("top-level node is not a TraceDocument", len(HEADER))
    return doc
