"""TML: a traced functional language with provenance extraction and slicing."""

from .annot import AEnv, AValue, erase, path_annotate
from .errors import (
    EvalError,
    FuelExhausted,
    IncompatiblePatterns,
    ParseError,
    PreconditionError,
    ReplayInconsistent,
    SerializationError,
    TmlError,
    TypeCheckError,
)
from .evaluate import evaluate
from .extract import (
    dep_structure,
    expr_structure,
    extract,
    trivial_structure,
    where_structure,
)
from .parser import parse_expr, parse_pattern, parse_pattern_env, parse_type, parse_value
from .replay import replay
from .serialize import TraceDocument, deserialize_trace, serialize_trace
from .session import Session
from .slicing import disc_view, disclosure_slice, obf_view, obfuscation_slice
from .typecheck import check_expr, check_trace, check_value

__version__ = "0.1.0"

__all__ = [
    "AEnv",
    "AValue",
    "EvalError",
    "FuelExhausted",
    "IncompatiblePatterns",
    "ParseError",
    "PreconditionError",
    "ReplayInconsistent",
    "SerializationError",
    "Session",
    "TmlError",
    "TraceDocument",
    "TypeCheckError",
    "check_expr",
    "check_trace",
    "check_value",
    "dep_structure",
    "deserialize_trace",
    "disc_view",
    "disclosure_slice",
    "erase",
    "evaluate",
    "expr_structure",
    "extract",
    "obf_view",
    "obfuscation_slice",
    "parse_expr",
    "parse_pattern",
    "parse_pattern_env",
    "parse_type",
    "parse_value",
    "path_annotate",
    "replay",
    "serialize_trace",
    "trivial_structure",
    "where_structure",
]
