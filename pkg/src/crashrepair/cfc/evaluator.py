"""Brute-force evaluator for constraint trees.

Semantics are mathematical (unbounded) integers: Ult/Ule and Slt/Sle all
mean plain </<= on values. Division truncates toward zero like C; a zero
divisor yields the distinguished ``UNDEFINED_DIV`` value. And/Or evaluate
both sides and let a dominating constant win (And with a false side is
false even when the other side is undefined), so annihilator rewrites
preserve meaning exactly.
"""

from __future__ import annotations

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


class UndefinedDiv:
    """Singleton result of dividing by zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UndefinedDiv"


UNDEFINED_DIV = UndefinedDiv()


class UnboundVariable(Exception):
    pass


def _trunc_div(a: int, b: int) -> int:
    # C division truncates toward zero; Python // floors.
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def evaluate(e: Expr, env: dict):
    """Evaluate under env; returns bool, int, or UNDEFINED_DIV."""
    match e:
        case BoolConst(value):
            return value
        case IntConst(value):
            return value
        case Var(name):
            if name not in env:
                raise UnboundVariable(name)
            return env[name]
        case Not(operand):
            v = evaluate(operand, env)
            return v if v is UNDEFINED_DIV else not v
        case And(l, r):
            lv, rv = evaluate(l, env), evaluate(r, env)
            if lv is False or rv is False:
                return False
            if lv is UNDEFINED_DIV or rv is UNDEFINED_DIV:
                return UNDEFINED_DIV
            return lv and rv
        case Or(l, r):
            lv, rv = evaluate(l, env), evaluate(r, env)
            if lv is True or rv is True:
                return True
            if lv is UNDEFINED_DIV or rv is UNDEFINED_DIV:
                return UNDEFINED_DIV
            return lv or rv
        case _:
            lv, rv = evaluate(e.left, env), evaluate(e.right, env)
            if lv is UNDEFINED_DIV or rv is UNDEFINED_DIV:
                return UNDEFINED_DIV
            match e:
                case Eq():
                    return lv == rv
                case Ne():
                    return lv != rv
                case Ult() | Slt():
                    return lv < rv
                case Ule() | Sle():
                    return lv <= rv
                case Add():
                    return lv + rv
                case Sub():
                    return lv - rv
                case Mul():
                    return lv * rv
                case Div():
                    return UNDEFINED_DIV if rv == 0 else _trunc_div(lv, rv)
    raise TypeError(f"unknown node {type(e).__name__}")
