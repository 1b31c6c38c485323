"""Shared test helpers: a deterministic random constraint generator.

The generator is the oracle for parse/print round-trips and for the
simplifier equivalence suite, so it lives here independent of the code
under test.
"""

from __future__ import annotations

import itertools
import random

from crashrepair.cfc.expr import (
    Add,
    And,
    BoolConst,
    Div,
    Eq,
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
    free_vars,
)

SIZE_MAX = 2**64 - 1

# Small constants only: the domain values below stress the boundary cases.
CONST_POOL = (0, 1, 2, 5, 7)

VAR_POOL = ("a", "b", "c", "d")

DOMAIN = (0, 1, 2, SIZE_MAX - 1, SIZE_MAX)

_BOOL_BINARY = (And, Or)
_INT_COMPARE = (Eq, Ne, Ult, Ule, Slt, Sle)
_ARITH = (Add, Sub, Mul, Div)


def gen_expr(rng: random.Random, sort: str = "bool", budget: int = 12):
    """Generate a sort-correct tree with at most `budget` nodes."""
    if sort == "int":
        if budget < 3 or rng.random() < 0.3:
            return _int_leaf(rng)
        op = rng.choice(_ARITH)
        left_budget = rng.randint(1, budget - 2)
        return op(
            gen_expr(rng, "int", left_budget),
            gen_expr(rng, "int", budget - 1 - left_budget),
        )

    if budget < 3:
        return BoolConst(rng.random() < 0.5)
    roll = rng.random()
    if roll < 0.08:
        return BoolConst(rng.random() < 0.5)
    if roll < 0.25:
        return Not(gen_expr(rng, "bool", budget - 1))
    if roll < 0.45 and budget >= 7:
        op = rng.choice(_BOOL_BINARY)
        left_budget = rng.randint(3, budget - 4)
        return op(
            gen_expr(rng, "bool", left_budget),
            gen_expr(rng, "bool", budget - 1 - left_budget),
        )
    if roll < 0.5 and budget >= 3:
        # Eq/Ne over booleans, the `Eq false (...)` shape
        op = rng.choice((Eq, Ne))
        left_budget = rng.randint(1, budget - 2)
        return op(
            gen_expr(rng, "bool", left_budget),
            gen_expr(rng, "bool", budget - 1 - left_budget),
        )
    op = rng.choice(_INT_COMPARE)
    left_budget = rng.randint(1, budget - 2)
    return op(
        gen_expr(rng, "int", left_budget),
        gen_expr(rng, "int", budget - 1 - left_budget),
    )


def _int_leaf(rng: random.Random):
    if rng.random() < 0.6:
        return Var(rng.choice(VAR_POOL))
    return IntConst(rng.choice(CONST_POOL))


def gen_suite(seed: int, count: int, budget: int = 12):
    """The frozen suite: `count` trees from one seeded generator."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        e = gen_expr(rng, "bool", budget)
        if len(free_vars(e)) <= 4:
            out.append(e)
    return out


def all_envs(names):
    """Every assignment of DOMAIN values to the given variable names."""
    names = sorted(names)
    for values in itertools.product(DOMAIN, repeat=len(names)):
        yield dict(zip(names, values))
