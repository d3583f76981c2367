from ._mobkit import (
    Database,
    DataError,
    Error,
    EvalError,
    InvalidValue,
    ParseError,
    RTree,
    SridMismatch,
    eval,
    normalize,
)

__all__ = [
    "Database",
    "DataError",
    "Error",
    "EvalError",
    "InvalidValue",
    "ParseError",
    "RTree",
    "SridMismatch",
    "eval",
    "normalize",
]
