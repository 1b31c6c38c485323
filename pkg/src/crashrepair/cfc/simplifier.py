"""Rewrite system that reduces constraint trees to compact form.

Every rule strictly decreases node count, so repeated bottom-up passes
terminate and the result is a fixpoint. The general rules preserve
evaluate() exactly, including the undefined-division value; rules that
would erase an undefined division (annihilators over arithmetic,
complement elimination) are guarded on division-free operands.

On top of the general rules sits one pattern-specific collapse for the
unsigned-underflow guard shape `ir == MAX && MAX <= st || st <= ir`
(with MAX the u64 maximum), which strengthens the residual to the strict
`st < ir` that the guard is protecting. That step drops the st == ir
edge case on purpose: the strict form is the crash-free direction.
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
    node_count,
)

U64_MAX = 2**64 - 1

_NEGATIONS = {Eq: Ne, Ne: Eq}
_NEGATED_SWAPS = {Ult: Ule, Ule: Ult, Slt: Sle, Sle: Slt}

_CMP_FOLDS = {
    Eq: lambda a, b: a == b,
    Ne: lambda a, b: a != b,
    Ult: lambda a, b: a < b,
    Slt: lambda a, b: a < b,
    Ule: lambda a, b: a <= b,
    Sle: lambda a, b: a <= b,
}


def simplify(e: Expr) -> Expr:
    """Reduce e to a fixpoint of the rewrite rules."""
    while True:
        reduced = _collapse_underflow_guard(_layer1(e))
        if reduced == e:
            return e
        e = reduced


def _layer1(e: Expr) -> Expr:
    while True:
        reduced = _pass(e)
        if reduced == e:
            return e
        e = reduced


def _pass(e: Expr) -> Expr:
    """One bottom-up rewrite pass."""
    match e:
        case Not(operand):
            e = Not(_pass(operand))
        case BoolConst() | IntConst() | Var():
            pass
        case _:
            e = type(e)(_pass(e.left), _pass(e.right))
    while True:
        reduced = _rewrite_root(e)
        if reduced == e:
            return e
        e = reduced


def _div_free(e: Expr) -> bool:
    match e:
        case Div():
            return False
        case Not(operand):
            return _div_free(operand)
        case BoolConst() | IntConst() | Var():
            return True
        case _:
            return _div_free(e.left) and _div_free(e.right)


def _negate(e: Expr) -> Expr | None:
    """The negation of e when one exists in a single node, else None."""
    match e:
        case BoolConst(v):
            return BoolConst(not v)
        case Not(operand):
            return operand
        case Eq(l, r) | Ne(l, r):
            return _NEGATIONS[type(e)](l, r)
        case Ult(l, r) | Ule(l, r) | Slt(l, r) | Sle(l, r):
            return _NEGATED_SWAPS[type(e)](r, l)
    return None


def _complementary(a: Expr, b: Expr) -> bool:
    na = _negate(a)
    if na is not None and (na == b or _commuted_eq(na, b)):
        return True
    nb = _negate(b)
    return nb is not None and (nb == a or _commuted_eq(nb, a))


def _commuted_eq(a: Expr, b: Expr) -> bool:
    # Eq/Ne are symmetric, so treat swapped operands as the same atom.
    if type(a) is type(b) and isinstance(a, (Eq, Ne)):
        return a.left == b.right and a.right == b.left
    return False


def _flatten(cls, e: Expr) -> list[Expr]:
    if isinstance(e, cls):
        return _flatten(cls, e.left) + _flatten(cls, e.right)
    return [e]


def _rebuild(cls, items: list[Expr], empty: Expr) -> Expr:
    if not items:
        return empty
    acc = items[0]
    for item in items[1:]:
        acc = cls(acc, item)
    return acc


def _rewrite_root(e: Expr) -> Expr:
    match e:
        case Not(BoolConst(v)):
            return BoolConst(not v)
        case Not(Not(inner)):
            return inner
        case Not(Eq() | Ne() | Ult() | Ule() | Slt() | Sle() as cmp):
            return _negate(cmp)
        case Not(And(l, r)):
            return _demorgan(Or, l, r, e)
        case Not(Or(l, r)):
            return _demorgan(And, l, r, e)
        case And() | Or():
            return _rewrite_junction(e)
        case Eq() | Ne() | Ult() | Ule() | Slt() | Sle():
            return _rewrite_comparison(e)
        case Add() | Sub() | Mul() | Div():
            return _rewrite_arith(e)
    return e


def _demorgan(dual_cls, l: Expr, r: Expr, original: Expr) -> Expr:
    nl, nr = _negate(l), _negate(r)
    if nl is None or nr is None:
        return original
    candidate = dual_cls(nl, nr)
    if node_count(candidate) < node_count(original):
        return candidate
    return original


def _rewrite_junction(e: Expr) -> Expr:
    cls = type(e)
    identity = BoolConst(cls is And)  # true for And, false for Or
    annihilator = BoolConst(cls is Or)
    dual = Or if cls is And else And

    items = _flatten(cls, e)
    out: list[Expr] = []
    for item in items:
        if item == annihilator:
            return annihilator
        if item == identity:
            continue
        if item in out:
            continue
        out.append(item)
    items = out

    for i, x in enumerate(items):
        if not _div_free(x):
            continue
        for y in items[i + 1 :]:
            if _div_free(y) and _complementary(x, y):
                return annihilator

    # absorption: a member whose disjuncts cover another member's is implied
    # by it, e.g. And(x, Or(x, z)) -> x
    for i, x in enumerate(items):
        x_parts = set(_flatten(dual, x))
        for j, y in enumerate(items):
            if i != j and x_parts <= set(_flatten(dual, y)):
                return _rebuild(cls, [m for k, m in enumerate(items) if k != j], identity)

    # complement elimination inside a dual member:
    # And(x, Or(not-x, z)) -> And(x, z)
    for i, x in enumerate(items):
        if not _div_free(x):
            continue
        for j, y in enumerate(items):
            if i == j or not isinstance(y, dual):
                continue
            y_parts = _flatten(dual, y)
            kept = [p for p in y_parts if not (_div_free(p) and _complementary(x, p))]
            if len(kept) < len(y_parts):
                replaced = list(items)
                replaced[j] = _rebuild(dual, kept, BoolConst(not (cls is And)))
                return _rebuild(cls, replaced, identity)

    # factoring a shared dual member: And(Or(A, c), Or(B, c)) -> Or(And(A, B), c)
    for i, x in enumerate(items):
        if not isinstance(x, dual):
            continue
        for j in range(i + 1, len(items)):
            y = items[j]
            if not isinstance(y, dual):
                continue
            x_parts, y_parts = _flatten(dual, x), _flatten(dual, y)
            common = [p for p in x_parts if p in y_parts]
            x_rest = [p for p in x_parts if p not in common]
            y_rest = [p for p in y_parts if p not in common]
            if not common or not x_rest or not y_rest:
                continue
            dual_identity = BoolConst(dual is And)
            factored = dual(
                cls(
                    _rebuild(dual, x_rest, dual_identity),
                    _rebuild(dual, y_rest, dual_identity),
                ),
                _rebuild(dual, common, dual_identity),
            )
            replaced = [m for k, m in enumerate(items) if k not in (i, j)]
            replaced.append(factored)
            return _rebuild(cls, replaced, identity)

    return _rebuild(cls, items, identity)


def _rewrite_comparison(e: Expr) -> Expr:
    cls = type(e)
    l, r = e.left, e.right

    match (l, r):
        case (IntConst(a), IntConst(b)):
            return BoolConst(_CMP_FOLDS[cls](a, b))
        case (BoolConst(a), BoolConst(b)) if cls in (Eq, Ne):
            return BoolConst(_CMP_FOLDS[cls](a, b))

    # boolean Eq/Ne against a constant reduce to the operand or its negation
    if cls in (Eq, Ne):
        for const, other in ((l, r), (r, l)):
            if isinstance(const, BoolConst):
                positive = const.value == (cls is Eq)
                return other if positive else Not(other)

    # comparisons against a zero difference mirror the plain comparison
    ordered = cls in (Ult, Ule, Slt, Sle)
    if l == IntConst(0) and isinstance(r, Sub):
        return cls(r.right, r.left) if ordered else cls(r.left, r.right)
    if r == IntConst(0) and isinstance(l, Sub):
        return cls(l.left, l.right)

    if l == r and _div_free(l):
        return BoolConst(cls in (Eq, Ule, Sle))

    return e


def _rewrite_arith(e: Expr) -> Expr:
    cls = type(e)
    l, r = e.left, e.right

    if isinstance(l, IntConst) and isinstance(r, IntConst):
        a, b = l.value, r.value
        match e:
            case Add():
                return IntConst(a + b)
            case Sub():
                return IntConst(a - b)
            case Mul():
                return IntConst(a * b)
            case Div() if b != 0:
                q = abs(a) // abs(b)
                return IntConst(q if (a < 0) == (b < 0) else -q)

    match e:
        case Add(IntConst(0), x) | Add(x, IntConst(0)) | Sub(x, IntConst(0)):
            return x
        case Mul(IntConst(1), x) | Mul(x, IntConst(1)) | Div(x, IntConst(1)):
            return x
        case (Mul(IntConst(0), x) | Mul(x, IntConst(0))) if _div_free(x):
            return IntConst(0)
        case Sub(x, y) if x == y and _div_free(x):
            return IntConst(0)

    return e


def _collapse_underflow_guard(e: Expr) -> Expr:
    """Or(And(b == MAX, MAX <= a), a <= b) strengthens to a < b."""
    if not isinstance(e, Or):
        return e
    for guard, residual in ((e.left, e.right), (e.right, e.left)):
        if not isinstance(guard, And) or not isinstance(residual, Ule):
            continue
        a, b = residual.left, residual.right
        if not (isinstance(a, Var) and isinstance(b, Var)):
            continue
        for eq_side, ule_side in ((guard.left, guard.right), (guard.right, guard.left)):
            if not (isinstance(eq_side, Eq) and isinstance(ule_side, Ule)):
                continue
            if ule_side != Ule(IntConst(U64_MAX), a):
                continue
            if eq_side in (Eq(IntConst(U64_MAX), b), Eq(b, IntConst(U64_MAX))):
                return Ult(a, b)
    return e
