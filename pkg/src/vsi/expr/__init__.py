"""Exact multivariate polynomial and rational-function arithmetic over Q."""

from .context import Symbol, SymbolKind, VariableContext
from .errors import (
    ExprError,
    MissingAssignmentError,
    ParseError,
    PoleError,
    UnknownIdentifierError,
)
from .parser import identifiers, parse_expression
from .poly import Polynomial, poly_gcd, to_fraction, to_q
from .rational import RationalFunction, differentiate, evaluate, gcd_normalize

__all__ = [
    "ExprError",
    "MissingAssignmentError",
    "ParseError",
    "PoleError",
    "Polynomial",
    "RationalFunction",
    "Symbol",
    "SymbolKind",
    "UnknownIdentifierError",
    "VariableContext",
    "differentiate",
    "evaluate",
    "gcd_normalize",
    "identifiers",
    "parse_expression",
    "poly_gcd",
    "to_fraction",
    "to_q",
]
