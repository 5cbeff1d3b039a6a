"""MSO formulas over PF-graphs and over one unary function."""

from .ast import depth, free_vars, colors_used
from .evaluate import EvalError, evaluate
from .parser import ParseError, dialect_of, parse
from .printer import to_text
from .translate import TranslationError, eliminate_functions

__all__ = [
    "parse", "to_text", "evaluate", "eliminate_functions", "depth", "free_vars",
    "colors_used", "dialect_of", "ParseError", "EvalError", "TranslationError",
]
