"""A small expression language for complex functions of one real variable."""

from .calculus import conjugate_reflect, differentiate
from .evaluate import Bindings, EvaluationError, UnboundParameter, evaluate
from .nodes import (
    Add,
    Const,
    Div,
    Expr,
    Func,
    IntPow,
    Mul,
    Neg,
    Param,
    Pow,
    Sub,
    Var,
    to_source,
)
from .parser import ParseError, UnknownFunction, parse

__all__ = [
    "Add",
    "Bindings",
    "Const",
    "Div",
    "EvaluationError",
    "Expr",
    "Func",
    "IntPow",
    "Mul",
    "Neg",
    "Param",
    "ParseError",
    "Pow",
    "Sub",
    "UnboundParameter",
    "UnknownFunction",
    "Var",
    "conjugate_reflect",
    "differentiate",
    "evaluate",
    "parse",
    "to_source",
]
