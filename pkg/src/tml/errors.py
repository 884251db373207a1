"""Exception hierarchy shared by every TML module."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("span start must not exceed end")

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


class TmlError(Exception):
    """Base class for all errors raised by the toolkit."""


class ParseError(TmlError):
    def __init__(self, message: str, span: SourceSpan | None = None):
        self.message = message
        self.span = span
        super().__init__(f"{span}: {message}" if span else message)


class TypeCheckError(TmlError):
    pass


class EvalError(TmlError):
    pass


class UnboundVariable(EvalError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable: {name}")


class FuelExhausted(EvalError):
    pass


class ReplayInconsistent(TmlError):
    pass


class PathMismatch(TmlError):
    pass


class IncompatiblePatterns(TmlError):
    pass


class PreconditionError(TmlError):
    pass


class SerializationError(TmlError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        super().__init__(f"{message} (at byte {offset})" if offset is not None else message)
