"""S-expression reader and printer for constraint trees.

Input syntax by example::

    (And (Or (Not (Eq false (Eq 18446744073709551615 initial_read)))
             (Ule 0 (Sub initial_read start)))
         ...)

Operators are prefix, integers unsigned decimal, identifiers C-like.
``print_cfc`` emits the canonical single-space form and is the exact
inverse of ``parse_cfc``.
"""

from __future__ import annotations

import re

from .expr import (
    BoolConst,
    Expr,
    IntConst,
    Not,
    OP_NAMES,
    NAME_OF,
    Var,
    sort_of,
)

_TOKEN_RE = re.compile(r"\s*(?:(\()|(\))|([A-Za-z_][A-Za-z0-9_]*)|(-?[0-9]+)|(\S))")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class CfcParseError(Exception):
    """Syntax or sort problem in a constraint text, with position info."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        lparen, rparen, word, number, junk = m.groups()
        start = m.end() - len(m.group().lstrip())
        if lparen:
            tokens.append(("(", "(", start))
        elif rparen:
            tokens.append((")", ")", start))
        elif word:
            tokens.append(("word", word, start))
        elif number:
            tokens.append(("int", number, start))
        elif junk:
            raise CfcParseError(f"unexpected character {junk!r}", start)
        pos = m.end()
    return tokens


def parse_cfc(text: str) -> Expr:
    """Parse a prefix S-expression into a sort-checked constraint tree."""
    tokens = _tokenize(text)
    if not tokens:
        raise CfcParseError("empty input, expected an expression", 0)
    expr, index = _parse_expr(tokens, 0)
    if index != len(tokens):
        kind, value, pos = tokens[index]
        raise CfcParseError(f"trailing input {value!r}, expected end of text", pos)
    try:
        sort_of(expr)
    except Exception as exc:
        raise CfcParseError(f"sort error: {exc}", 0) from exc
    return expr


def _parse_expr(tokens, index: int) -> tuple[Expr, int]:
    kind, value, pos = tokens[index]
    if kind == "int":
        return IntConst(int(value)), index + 1
    if kind == "word":
        if value == "true":
            return BoolConst(True), index + 1
        if value == "false":
            return BoolConst(False), index + 1
        return Var(value), index + 1
    if kind == ")":
        raise CfcParseError("unexpected ')', expected an expression", pos)

    # kind == "(" is an operator application
    index += 1
    if index >= len(tokens):
        raise CfcParseError("unterminated '(', expected an operator", pos)
    kind, op_name, op_pos = tokens[index]
    if kind != "word" or op_name in ("true", "false"):
        raise CfcParseError(f"expected an operator name, got {op_name!r}", op_pos)
    op_cls = OP_NAMES.get(op_name)
    if op_cls is None:
        raise CfcParseError(f"unknown operator {op_name!r}", op_pos)
    index += 1

    args = []
    while index < len(tokens) and tokens[index][0] != ")":
        arg, index = _parse_expr(tokens, index)
        args.append(arg)
    if index >= len(tokens):
        raise CfcParseError("unterminated '(', expected ')'", pos)
    index += 1  # consume ')'

    arity = 1 if op_cls is Not else 2
    if len(args) != arity:
        raise CfcParseError(
            f"operator {op_name} takes {arity} argument(s), got {len(args)}", op_pos
        )
    return op_cls(*args), index


def print_cfc(e: Expr) -> str:
    """Render the canonical single-space-separated prefix form."""
    match e:
        case BoolConst(value):
            return "true" if value else "false"
        case IntConst(value):
            return str(value)
        case Var(name):
            return name
        case Not(operand):
            return f"(Not {print_cfc(operand)})"
        case _:
            name = NAME_OF[type(e)]
            return f"({name} {print_cfc(e.left)} {print_cfc(e.right)})"


def is_identifier(name: str) -> bool:
    return bool(_IDENT_RE.match(name)) and name not in ("true", "false")
