"""Unfold/fold transformation workbench for definite logic programs."""

__version__ = "0.1.0"

from .kernel import (
    Atom,
    Clause,
    Const,
    Program,
    Struct,
    Substitution,
    Var,
    alpha_equivalent_programs,
    rename_apart,
    unify,
)
from .parser import format_program, parse_clause, parse_literal, parse_program, parse_query
from .engine import AnswerSet, ModelSummary, SolveLimits, Solver, bounded_extension, solve

__all__ = [
    "Atom", "Clause", "Const", "Program", "Struct", "Substitution", "Var",
    "alpha_equivalent_programs", "rename_apart", "unify",
    "format_program", "parse_clause", "parse_literal", "parse_program", "parse_query",
    "AnswerSet", "ModelSummary", "SolveLimits", "Solver", "bounded_extension", "solve",
    "__version__",
]
