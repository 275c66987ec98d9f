"""lrlab: an executable workbench for typed lambda calculi.

Core layers: ``kernel`` (syntax and binding), ``surface`` (parse/print),
``statics`` (typechecking), ``dynamics`` (small-step evaluation),
``equivalence`` (contexts, generators, distinguishing search), ``logrel``
(unary predicates), ``relational`` (the binary relation and free theorems),
``stepworld`` (step-indexed models with worlds).  ``service`` exposes the
checks over HTTP; ``cli`` is a thin client over the same runner.
"""

from .kernel import Level, LEVEL_PRESETS, Term, Type, alpha_eq, resolve_level
from .surface import ParseError, parse_term, parse_type, print_term, print_type
from .statics import TypeCheckError, typecheck, typecheck_closed
from .dynamics import Config, eval_star, make_allocator, step, trace
from .verdict import Bounds, Verdict

__version__ = "0.1.0"

__all__ = [
    "Bounds", "Config", "LEVEL_PRESETS", "Level", "ParseError", "Term",
    "Type", "TypeCheckError", "Verdict", "alpha_eq", "eval_star",
    "make_allocator", "parse_term", "parse_type", "print_term", "print_type",
    "resolve_level", "step", "trace", "typecheck", "typecheck_closed",
    "__version__",
]
