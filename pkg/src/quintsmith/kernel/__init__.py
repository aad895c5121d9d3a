"""Executable kernel for the modeling-language subset.

Parsing, canonical printing, typechecking, and pure evaluation live
here, along with the value model and the diagnostic format shared by
every stage of the pipeline.
"""

from .check import BuiltinChecker, ExternalChecker
from .diagnostics import (
    ARITY_ERROR, DIV_BY_ZERO, DUPLICATE_DEF, FIELD_ERROR, INDEX_RANGE,
    MATCH_ERROR, MISSING_KEY, MODE_ERROR, NAME_ERROR, NO_MATCH_ARM, PARSE,
    RUNTIME_GENERIC, TYPE_MISMATCH, Diagnostic, KernelError, ParseError,
    RuntimeEvalError, render_all,
)
from .eval import Evaluator, eval_pure
from .parser import parse_expression, parse_module
from .printer import print_decl, print_expr, print_module, print_type
from .syntax import Module, ast_equal
from .typecheck import typecheck
from .values import (
    Value, VBool, VInt, VLambda, VList, VMap, VRecord, VSet, VStr, VTuple,
    VVariant, canon, mk_map, mk_set, render_value, value_from_jsonable,
    value_to_jsonable, values_equal,
)

__all__ = [
    "ARITY_ERROR", "DIV_BY_ZERO", "DUPLICATE_DEF", "FIELD_ERROR",
    "INDEX_RANGE", "MATCH_ERROR", "MISSING_KEY", "MODE_ERROR", "NAME_ERROR",
    "NO_MATCH_ARM", "PARSE", "RUNTIME_GENERIC", "TYPE_MISMATCH",
    "BuiltinChecker", "Diagnostic", "Evaluator", "ExternalChecker",
    "KernelError", "Module", "ParseError", "RuntimeEvalError", "VBool",
    "VInt", "VLambda", "VList", "VMap", "VRecord", "VSet", "VStr", "VTuple",
    "VVariant", "Value", "ast_equal", "canon", "eval_pure", "mk_map",
    "mk_set", "parse_expression", "parse_module", "print_decl", "print_expr",
    "print_module", "print_type", "render_all", "render_value", "typecheck",
    "value_from_jsonable", "value_to_jsonable", "values_equal",
]
