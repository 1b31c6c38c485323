"""Crash-free constraint handling: parse, simplify, render, template."""

from .evaluator import UNDEFINED_DIV, UnboundVariable, evaluate
from .expr import Expr, SortError, free_vars, node_count, sort_of
from .nl import ConditionParseError, NlRenderError, parse_condition, render_expr_nl
from .parser import CfcParseError, parse_cfc, print_cfc
from .simplifier import simplify
from .templates import (
    CfcDocument,
    TemplateArityError,
    TemplateClass,
    TemplateInstance,
    document_from_expr,
    document_to_json,
    instantiate_template,
    load_cfc_text,
    render_nl,
    template_expr,
)

__all__ = [
    "UNDEFINED_DIV",
    "UnboundVariable",
    "evaluate",
    "Expr",
    "SortError",
    "free_vars",
    "node_count",
    "sort_of",
    "ConditionParseError",
    "NlRenderError",
    "parse_condition",
    "render_expr_nl",
    "CfcParseError",
    "parse_cfc",
    "print_cfc",
    "simplify",
    "CfcDocument",
    "TemplateArityError",
    "TemplateClass",
    "TemplateInstance",
    "document_from_expr",
    "document_to_json",
    "instantiate_template",
    "load_cfc_text",
    "render_nl",
    "template_expr",
]
