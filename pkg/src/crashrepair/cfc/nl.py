"""Natural-language rendering of constraint trees and C condition text.

Sentences follow the fixed wording used across the templates: variables
are introduced as "variable x", comparisons become "should be less
than" style phrases, and conjoined clauses are glued with "and ensure
that" so a compound constraint reads as one instruction.
"""

from __future__ import annotations

import re

from .expr import (
    Add,
    And,
    BoolConst,
    Div,
    Eq,
    Expr,
    IntConst,
    Mul,
    Ne,
    Not,
    Or,
    Sle,
    Slt,
    Sub,
    Ule,
    Ult,
    Var,
)

ARITH_SYMBOLS = {Add: "+", Sub: "-", Mul: "*", Div: "/"}

_RELATIONS = {
    Ult: "less than",
    Slt: "less than",
    Ule: "less than or equal to",
    Sle: "less than or equal to",
}


class NlRenderError(Exception):
    """Raised for a node kind that has no sentence form."""

    def __init__(self, node_kind: str):
        super().__init__(f"cannot render node kind {node_kind}")
        self.node_kind = node_kind


def render_expr_nl(e: Expr) -> str:
    """Render a boolean constraint tree as instruction sentences."""
    clauses = [_clause(c) for c in _split(And, e)]
    out = clauses[0]
    for clause in clauses[1:]:
        out += " and ensure that " + _lower_first(clause)
    return out


def _split(cls, e: Expr) -> list[Expr]:
    if isinstance(e, cls):
        return _split(cls, e.left) + _split(cls, e.right)
    return [e]


def _clause(e: Expr) -> str:
    match e:
        case Or(l, r):
            return _clause(l) + " or " + _lower_first(_clause(r))
        case Not(operand):
            negated = _negated(operand)
            if negated is None:
                raise NlRenderError("Not")
            return _clause(negated)
        case Eq(l, r):
            return f"{_subject(l)} should be equal to {_operand(r)}"
        case Ne(l, r):
            return f"{_subject(l)} should not be equal to {_operand(r)}"
        case Ult(l, r) | Ule(l, r) | Slt(l, r) | Sle(l, r):
            relation = _RELATIONS[type(e)]
            if isinstance(l, IntConst) and not isinstance(r, IntConst):
                flipped = "greater than" if type(e) in (Ult, Slt) else "greater than or equal to"
                return f"{_subject(r)} should be {flipped} {_operand(l)}"
            return f"{_subject(l)} should be {relation} {_operand(r)}"
        case _:
            raise NlRenderError(type(e).__name__)


def _negated(e: Expr) -> Expr | None:
    match e:
        case Eq(l, r):
            return Ne(l, r)
        case Ne(l, r):
            return Eq(l, r)
        case Ult(l, r):
            return Ule(r, l)
        case Ule(l, r):
            return Ult(r, l)
        case Slt(l, r):
            return Sle(r, l)
        case Sle(l, r):
            return Slt(r, l)
    return None


def _subject(e: Expr) -> str:
    text = _operand(e)
    return text[0].upper() + text[1:]


def _operand(e: Expr) -> str:
    match e:
        case Var(name):
            return f"variable {name}"
        case IntConst(value):
            return str(value)
        case BoolConst(value):
            return "true" if value else "false"
        case Add() | Sub() | Mul() | Div():
            return f"the value of {_infix(e)}"
        case _:
            raise NlRenderError(type(e).__name__)


def _infix(e: Expr) -> str:
    match e:
        case Var(name):
            return name
        case IntConst(value):
            return str(value)
        case Add() | Sub() | Mul() | Div():
            left, right = _infix(e.left), _infix(e.right)
            if isinstance(e.left, (Add, Sub, Mul, Div)):
                left = f"({left})"
            if isinstance(e.right, (Add, Sub, Mul, Div)):
                right = f"({right})"
            return f"{left} {ARITH_SYMBOLS[type(e)]} {right}"
        case _:
            raise NlRenderError(type(e).__name__)


def _lower_first(text: str) -> str:
    return text[0].lower() + text[1:] if text else text


# --- C condition text: a small infix parser for assertion conditions ---

_COND_TOKEN = re.compile(
    r"\s*(?:(&&|\|\||==|!=|<=|>=|<|>|!|\(|\)|\+|-|\*|/|%)"
    r"|([A-Za-z_][A-Za-z0-9_]*)|([0-9]+))"
)

_WORD_OPS = {"and": "&&", "or": "||", "not": "!"}


class ConditionParseError(Exception):
    pass


def _cond_tokens(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].isspace():
            break
        m = _COND_TOKEN.match(text, pos)
        if m is None:
            raise ConditionParseError(f"bad character in condition at offset {pos}")
        op, word, number = m.groups()
        if word in _WORD_OPS:
            tokens.append(_WORD_OPS[word])
        else:
            tokens.append(op or word or number)
        pos = m.end()
    return tokens


class _CondParser:
    """Precedence-climbing parser: || < && < comparison < additive < term."""

    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        token = self.peek()
        self.pos += 1
        return token

    def expect(self, token: str):
        got = self.take()
        if got != token:
            raise ConditionParseError(f"expected {token!r}, got {got!r}")

    def parse(self) -> Expr:
        e = self.parse_or()
        if self.peek() is not None:
            raise ConditionParseError(f"trailing token {self.peek()!r}")
        return e

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.peek() == "||":
            self.take()
            e = Or(e, self.parse_and())
        return e

    def parse_and(self) -> Expr:
        e = self.parse_comparison()
        while self.peek() == "&&":
            self.take()
            e = And(e, self.parse_comparison())
        return e

    def parse_comparison(self) -> Expr:
        if self.peek() == "!":
            self.take()
            operand = self.parse_comparison()
            return Not(_as_bool(operand))
        left = self.parse_additive()
        op = self.peek()
        if op in ("<", "<=", ">", ">=", "==", "!="):
            self.take()
            right = self.parse_additive()
            match op:
                case "<":
                    return Ult(left, right)
                case "<=":
                    return Ule(left, right)
                case ">":
                    return Ult(right, left)
                case ">=":
                    return Ule(right, left)
                case "==":
                    return Eq(left, right)
                case "!=":
                    return Ne(left, right)
        return left

    def parse_additive(self) -> Expr:
        e = self.parse_term()
        while self.peek() in ("+", "-"):
            cls = Add if self.take() == "+" else Sub
            e = cls(e, self.parse_term())
        return e

    def parse_term(self) -> Expr:
        e = self.parse_atom()
        while self.peek() in ("*", "/"):
            cls = Mul if self.take() == "*" else Div
            e = cls(e, self.parse_atom())
        return e

    def parse_atom(self) -> Expr:
        token = self.take()
        if token == "(":
            e = self.parse_or()
            self.expect(")")
            return e
        if token is None:
            raise ConditionParseError("unexpected end of condition")
        if token == "%":
            raise ConditionParseError("modulo is not supported in conditions")
        if token.isdigit():
            return IntConst(int(token))
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", token):
            return Var(token)
        raise ConditionParseError(f"unexpected token {token!r}")


def _as_bool(e: Expr) -> Expr:
    # a bare value used as a condition means "nonzero"
    if isinstance(e, (Var, IntConst, Add, Sub, Mul, Div)):
        return Ne(e, IntConst(0))
    return e


def parse_condition(text: str) -> Expr:
    """Parse C-style condition text into a boolean constraint tree."""
    tokens = _cond_tokens(text)
    if not tokens:
        raise ConditionParseError("empty condition")
    return _as_bool(_CondParser(tokens).parse())


_COND_RELATIONS = {
    Ult: "is less than",
    Ule: "is less than or equal to",
    Eq: "is equal to",
    Ne: "is not equal to",
    Slt: "is less than",
    Sle: "is less than or equal to",
}


def describe_condition(e: Expr) -> str:
    """Condition-description phrasing: "s is less than spp"."""
    match e:
        case And(l, r):
            return describe_condition(l) + " and ensure that " + describe_condition(r)
        case Or(l, r):
            return describe_condition(l) + " or " + describe_condition(r)
        case Not(operand):
            negated = _negated(operand)
            if negated is not None:
                return describe_condition(negated)
            return "it is not the case that " + describe_condition(operand)
        case Eq(l, r) | Ne(l, r) | Ult(l, r) | Ule(l, r) | Slt(l, r) | Sle(l, r):
            # flip constant-first comparisons into subject-first phrasing
            if isinstance(l, IntConst) and not isinstance(r, IntConst) and type(e) in (Ult, Ule, Slt, Sle):
                phrase = "is greater than" if type(e) in (Ult, Slt) else "is greater than or equal to"
                return f"{_infix(r)} {phrase} {_infix(l)}"
            return f"{_infix(l)} {_COND_RELATIONS[type(e)]} {_infix(r)}"
        case _:
            raise NlRenderError(type(e).__name__)
