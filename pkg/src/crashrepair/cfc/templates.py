"""Constraint templates keyed by crash shape, and the constraint document.

Six template classes cover the usual sanitizer findings plus developer
assertions. Each class pairs an expression schema with a fixed sentence
pattern; instantiation fills both from the slot values.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Optional

from ..location import SourceLocation
from .expr import Add, And, Div, Eq, Expr, IntConst, Mul, Ne, Or, Sub, Ule, Var, free_vars
from .nl import NlRenderError, describe_condition, parse_condition, render_expr_nl
from .parser import is_identifier, parse_cfc, print_cfc
from .simplifier import simplify


class TemplateClass(enum.Enum):
    T1_Assert = "assert"
    T2_PointerBounds = "pointer-bounds"
    T3_ArithRange = "arith-range"
    T4_MemOverlap = "mem-overlap"
    T5_NullPointer = "null-pointer"
    T6_DivByZero = "div-by-zero"


SLOT_NAMES = {
    TemplateClass.T1_Assert: ("condition",),
    TemplateClass.T2_PointerBounds: ("pointer",),
    TemplateClass.T3_ArithRange: ("a", "op", "b", "min", "max"),
    TemplateClass.T4_MemOverlap: ("p", "q", "s"),
    TemplateClass.T5_NullPointer: ("pointer",),
    TemplateClass.T6_DivByZero: ("divisor",),
}

_ARITH_BY_SYMBOL = {"+": Add, "-": Sub, "*": Mul, "/": Div}


class TemplateArityError(Exception):
    pass


@dataclass(frozen=True)
class TemplateInstance:
    template_class: TemplateClass
    slots: dict

    def __post_init__(self):
        expected = SLOT_NAMES[self.template_class]
        if tuple(sorted(self.slots)) != tuple(sorted(expected)):
            raise TemplateArityError(
                f"{self.template_class.name} takes slots {expected}, got {tuple(self.slots)}"
            )


@dataclass
class CfcDocument:
    expr: Expr
    nl_text: str
    anchor: Optional[SourceLocation] = None
    template: Optional[TemplateInstance] = None

    def __post_init__(self):
        if not self.nl_text:
            raise ValueError("nl_text must be non-empty")


def render_nl(target) -> str:
    """Render a document, template instance, or expression to sentences."""
    if isinstance(target, CfcDocument):
        return target.nl_text
    if isinstance(target, TemplateInstance):
        return _render_template(target)
    if isinstance(target, Expr):
        return render_expr_nl(target)
    raise NlRenderError(type(target).__name__)


def _render_template(instance: TemplateInstance) -> str:
    s = instance.slots
    match instance.template_class:
        case TemplateClass.T1_Assert:
            desc = describe_condition(parse_condition(s["condition"]))
            return f"Ensure that {desc}."
        case TemplateClass.T2_PointerBounds:
            return f"Pointer {s['pointer']} should be within its allocated bounds"
        case TemplateClass.T3_ArithRange:
            return (
                f"The result of {s['a']} {s['op']} {s['b']} "
                f"should be within the range from {s['min']} to {s['max']}"
            )
        case TemplateClass.T4_MemOverlap:
            return f"The memory regions defined by {s['p']} and {s['q']} should not overlap"
        case TemplateClass.T5_NullPointer:
            return f"Pointer {s['pointer']} should points to a valid address"
        case TemplateClass.T6_DivByZero:
            return f"Variable {s['divisor']} should not be equal to zero"


def _operand_expr(value) -> Expr:
    if isinstance(value, int):
        return IntConst(value)
    text = str(value).strip()
    if re.fullmatch(r"-?[0-9]+", text):
        return IntConst(int(text))
    if is_identifier(text):
        return Var(text)
    raise ValueError(f"slot value {value!r} is neither a number nor an identifier")


def template_expr(instance: TemplateInstance) -> Expr:
    """The expression schema of the template, slots substituted."""
    s = instance.slots
    match instance.template_class:
        case TemplateClass.T1_Assert:
            return parse_condition(s["condition"])
        case TemplateClass.T2_PointerBounds:
            p = s["pointer"]
            base, size, width = Var(f"__base_{p}"), Var(f"__size_{p}"), Var(f"__sizeof_deref_{p}")
            return And(
                Ule(Add(Var(p), width), Add(base, size)),
                Ule(base, Var(p)),
            )
        case TemplateClass.T3_ArithRange:
            op_cls = _ARITH_BY_SYMBOL[s["op"]]
            result = op_cls(_operand_expr(s["a"]), _operand_expr(s["b"]))
            return And(
                Ule(IntConst(int(s["min"])), result),
                Ule(result, IntConst(int(s["max"]))),
            )
        case TemplateClass.T4_MemOverlap:
            p, q, size = Var(s["p"]), Var(s["q"]), _operand_expr(s["s"])
            return Or(Ule(Add(p, size), q), Ule(Add(q, size), p))
        case TemplateClass.T5_NullPointer:
            return Ne(Var(s["pointer"]), IntConst(0))
        case TemplateClass.T6_DivByZero:
            return Ne(Var(s["divisor"]), IntConst(0))


def instantiate_template(template_class: TemplateClass, slots: dict) -> CfcDocument:
    instance = TemplateInstance(template_class, dict(slots))
    return CfcDocument(
        expr=template_expr(instance),
        nl_text=_render_template(instance),
        template=instance,
    )


def document_from_expr(e: Expr, anchor: Optional[SourceLocation] = None) -> CfcDocument:
    """Simplify and render a raw constraint; checks name coverage."""
    reduced = simplify(e)
    nl_text = render_expr_nl(reduced)
    for name in free_vars(reduced):
        if name not in nl_text:
            raise NlRenderError(f"variable {name} missing from rendering")
    return CfcDocument(expr=reduced, nl_text=nl_text, anchor=anchor)


_ANCHOR_RE = re.compile(r"@\s*(?P<file>\S+):(?P<line>\d+)\s*$")


def load_cfc_text(text: str) -> CfcDocument:
    """Parse a constraint file: optional `@ file:line` first line, then
    the expression."""
    lines = text.splitlines()
    anchor = None
    body_start = 0
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        m = _ANCHOR_RE.match(line.strip())
        if m:
            anchor = SourceLocation(m.group("file"), int(m.group("line")))
            body_start = i + 1
        break
    body = "\n".join(lines[body_start:])
    return document_from_expr(parse_cfc(body), anchor=anchor)


def document_to_json(doc: CfcDocument) -> dict:
    out = {
        "expr": print_cfc(doc.expr),
        "nl_text": doc.nl_text,
    }
    if doc.anchor is not None:
        out["anchor"] = {"file": doc.anchor.file, "line": doc.anchor.line}
    if doc.template is not None:
        out["template"] = {
            "class": doc.template.template_class.name,
            "slots": {k: str(v) for k, v in doc.template.slots.items()},
        }
    return out
