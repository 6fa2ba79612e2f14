"""Expression language for model files."""

from .compile import compile_expr, field
from .errors import DimensionMismatch, DomainError, DslError, LexError, ParseError, SchemaError, UnknownVariable
from .nodes import BinOp, Call, Expr, Neg, Num, Var, to_string
from .parser import VarSpec, parse, tokenize


def load_model(path):
    from .model import load_model as _load

    return _load(path)


def loads(text: str):
    from .model import loads as _loads

    return _loads(text)


__all__ = [
    "BinOp", "Call", "DimensionMismatch", "DomainError", "DslError", "Expr", "LexError", "Neg", "Num",
    "ParseError", "SchemaError", "UnknownVariable", "Var", "VarSpec", "compile_expr", "field", "load_model",
    "loads", "parse", "to_string", "tokenize",
]
