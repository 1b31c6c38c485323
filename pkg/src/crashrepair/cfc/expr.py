"""Expression tree for crash-free constraints.

Nodes are immutable; comparison and logic nodes have boolean sort,
arithmetic nodes integer sort. ``Eq``/``Ne`` additionally accept a pair of
boolean children (the ``Eq false (...)`` pattern seen in extracted
constraints).
"""

from __future__ import annotations

from dataclasses import dataclass

BOOL = "bool"
INT = "int"


class SortError(Exception):
    """Raised when a node's children have incompatible sorts."""


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class BoolConst(Expr):
    value: bool


@dataclass(frozen=True)
class IntConst(Expr):
    value: int


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinaryExpr(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class And(BinaryExpr):
    pass


@dataclass(frozen=True)
class Or(BinaryExpr):
    pass


@dataclass(frozen=True)
class Eq(BinaryExpr):
    pass


@dataclass(frozen=True)
class Ne(BinaryExpr):
    pass


@dataclass(frozen=True)
class Ult(BinaryExpr):
    pass


@dataclass(frozen=True)
class Ule(BinaryExpr):
    pass


@dataclass(frozen=True)
class Slt(BinaryExpr):
    pass


@dataclass(frozen=True)
class Sle(BinaryExpr):
    pass


@dataclass(frozen=True)
class Add(BinaryExpr):
    pass


@dataclass(frozen=True)
class Sub(BinaryExpr):
    pass


@dataclass(frozen=True)
class Mul(BinaryExpr):
    pass


@dataclass(frozen=True)
class Div(BinaryExpr):
    pass


LOGIC_OPS = {"And": And, "Or": Or}
COMPARISON_OPS = {"Eq": Eq, "Ne": Ne, "Ult": Ult, "Ule": Ule, "Slt": Slt, "Sle": Sle}
ARITH_OPS = {"Add": Add, "Sub": Sub, "Mul": Mul, "Div": Div}

OP_NAMES = {**LOGIC_OPS, **COMPARISON_OPS, **ARITH_OPS, "Not": Not}
NAME_OF = {cls: name for name, cls in OP_NAMES.items()}


def sort_of(e: Expr) -> str:
    """Return "bool" or "int"; raise SortError on ill-sorted trees.

    Variables are untyped in the source syntax, so a bare Var is
    integer-sorted; boolean positions must be filled by logic nodes,
    comparisons, or boolean constants.
    """
    match e:
        case BoolConst():
            return BOOL
        case IntConst() | Var():
            return INT
        case Not(operand):
            if sort_of(operand) != BOOL:
                raise SortError("Not requires a boolean operand")
            return BOOL
        case And(l, r) | Or(l, r):
            if sort_of(l) != BOOL or sort_of(r) != BOOL:
                raise SortError(f"{type(e).__name__} requires boolean operands")
            return BOOL
        case Eq(l, r) | Ne(l, r):
            if sort_of(l) != sort_of(r):
                raise SortError(f"{type(e).__name__} operands must share a sort")
            return BOOL
        case Ult(l, r) | Ule(l, r) | Slt(l, r) | Sle(l, r):
            if sort_of(l) != INT or sort_of(r) != INT:
                raise SortError(f"{type(e).__name__} requires integer operands")
            return BOOL
        case Add(l, r) | Sub(l, r) | Mul(l, r) | Div(l, r):
            if sort_of(l) != INT or sort_of(r) != INT:
                raise SortError(f"{type(e).__name__} requires integer operands")
            return INT
    raise SortError(f"unknown node {type(e).__name__}")


def free_vars(e: Expr) -> set[str]:
    match e:
        case Var(name):
            return {name}
        case Not(operand):
            return free_vars(operand)
        case BinaryExpr(l, r):
            return free_vars(l) | free_vars(r)
        case _:
            return set()


def node_count(e: Expr) -> int:
    match e:
        case Not(operand):
            return 1 + node_count(operand)
        case BinaryExpr(l, r):
            return 1 + node_count(l) + node_count(r)
        case _:
            return 1
