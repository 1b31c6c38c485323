from pathlib import Path

import pytest

from crashrepair.cfc.expr import (
    Add,
    And,
    Eq,
    IntConst,
    Mul,
    Ne,
    Or,
    Sub,
    Ule,
    Ult,
    Var,
    free_vars,
)
from crashrepair.cfc.nl import (
    ConditionParseError,
    NlRenderError,
    describe_condition,
    parse_condition,
    render_expr_nl,
)
from crashrepair.cfc.parser import parse_cfc
from crashrepair.cfc.templates import (
    CfcDocument,
    TemplateArityError,
    TemplateClass,
    document_from_expr,
    instantiate_template,
    load_cfc_text,
    render_nl,
    template_expr,
)

DATA = Path(__file__).parent / "data"


def test_t1_assert_golden():
    doc = instantiate_template(TemplateClass.T1_Assert, {"condition": "s < spp && s < 8"})
    assert doc.nl_text == "Ensure that s is less than spp and ensure that s is less than 8."
    assert doc.expr == And(Ult(Var("s"), Var("spp")), Ult(Var("s"), IntConst(8)))


def test_t1_accepts_word_operators():
    doc = instantiate_template(TemplateClass.T1_Assert, {"condition": "s < spp and s < 8"})
    assert doc.nl_text == "Ensure that s is less than spp and ensure that s is less than 8."


def test_t2_pointer_bounds_golden():
    doc = instantiate_template(TemplateClass.T2_PointerBounds, {"pointer": "p"})
    assert doc.nl_text == "Pointer p should be within its allocated bounds"
    assert doc.expr == And(
        Ule(Add(Var("p"), Var("__sizeof_deref_p")), Add(Var("__base_p"), Var("__size_p"))),
        Ule(Var("__base_p"), Var("p")),
    )


def test_t3_arith_range_golden():
    doc = instantiate_template(
        TemplateClass.T3_ArithRange,
        {"a": "x", "op": "*", "b": "y", "min": 0, "max": 2147483647},
    )
    assert doc.nl_text == "The result of x * y should be within the range from 0 to 2147483647"
    result = Mul(Var("x"), Var("y"))
    assert doc.expr == And(
        Ule(IntConst(0), result), Ule(result, IntConst(2147483647))
    )


def test_t4_mem_overlap_golden():
    doc = instantiate_template(TemplateClass.T4_MemOverlap, {"p": "dst", "q": "src", "s": "n"})
    assert doc.nl_text == "The memory regions defined by dst and src should not overlap"
    assert doc.expr == Or(
        Ule(Add(Var("dst"), Var("n")), Var("src")),
        Ule(Add(Var("src"), Var("n")), Var("dst")),
    )


def test_t5_null_pointer_golden():
    doc = instantiate_template(TemplateClass.T5_NullPointer, {"pointer": "p"})
    assert doc.nl_text == "Pointer p should points to a valid address"
    assert doc.expr == Ne(Var("p"), IntConst(0))


def test_t6_div_by_zero_golden():
    doc = instantiate_template(TemplateClass.T6_DivByZero, {"divisor": "b"})
    assert doc.nl_text == "Variable b should not be equal to zero"
    assert doc.expr == Ne(Var("b"), IntConst(0))


def test_t6_example_divisor():
    doc = instantiate_template(TemplateClass.T6_DivByZero, {"divisor": "horizSubSampling"})
    assert doc.expr == Ne(Var("horizSubSampling"), IntConst(0))
    assert doc.nl_text == "Variable horizSubSampling should not be equal to zero"


def test_arity_rejection():
    with pytest.raises(TemplateArityError):
        instantiate_template(TemplateClass.T6_DivByZero, {"divisor": "b", "extra": "x"})
    with pytest.raises(TemplateArityError):
        instantiate_template(TemplateClass.T3_ArithRange, {"a": "x", "op": "+", "b": "y"})


def test_generic_comparison_sentence():
    e = parse_cfc("(Ult start initial_read)")
    assert render_expr_nl(e) == "Variable start should be less than variable initial_read"


def test_generic_rendering_forms():
    assert render_expr_nl(parse_cfc("(Eq x 0)")) == "Variable x should be equal to 0"
    assert render_expr_nl(parse_cfc("(Ne x 0)")) == "Variable x should not be equal to 0"
    assert render_expr_nl(parse_cfc("(Ule x 8)")) == "Variable x should be less than or equal to 8"
    assert (
        render_expr_nl(parse_cfc("(Ult 8 x)")) == "Variable x should be greater than 8"
    )
    assert (
        render_expr_nl(parse_cfc("(Ult (Add a b) n)"))
        == "The value of a + b should be less than variable n"
    )


def test_conjunction_joins_with_ensure_phrase():
    e = parse_cfc("(And (Ult s spp) (Ne b 0))")
    assert (
        render_expr_nl(e)
        == "Variable s should be less than variable spp"
        " and ensure that variable b should not be equal to 0"
    )


def test_disjunction_renders():
    e = parse_cfc("(Or (Ult a b) (Eq a b))")
    text = render_expr_nl(e)
    assert " or " in text
    assert text.startswith("Variable a should be less than variable b")


def test_unrenderable_node_errors_with_kind():
    with pytest.raises(NlRenderError) as exc:
        render_expr_nl(parse_cfc("(Not (And (Ult a b) (Or (Eq c 0) (Eq d 0))))"))
    assert exc.value.node_kind in ("Not", "And")


def test_document_invariant_every_var_in_text():
    doc = document_from_expr(parse_cfc("(And (Ult s spp) (Ne b 0))"))
    for name in free_vars(doc.expr):
        assert name in doc.nl_text


def test_document_rejects_empty_text():
    with pytest.raises(ValueError):
        CfcDocument(expr=parse_cfc("(Eq x 0)"), nl_text="")


def test_load_cfc_text_with_anchor():
    text = (DATA / "memmove_underflow.cfc").read_text()
    doc = load_cfc_text(text)
    assert doc.anchor is not None
    assert doc.anchor.file == "src/read_file.c"
    assert doc.anchor.line == 31
    assert doc.expr == Ult(Var("start"), Var("initial_read"))
    assert doc.nl_text == "Variable start should be less than variable initial_read"


def test_load_cfc_text_without_anchor():
    doc = load_cfc_text("(Ne b 0)")
    assert doc.anchor is None
    assert doc.expr == Ne(Var("b"), IntConst(0))


def test_render_nl_dispatch():
    doc = instantiate_template(TemplateClass.T6_DivByZero, {"divisor": "b"})
    assert render_nl(doc) == doc.nl_text
    assert render_nl(doc.template) == doc.nl_text
    assert render_nl(parse_cfc("(Ult a b)")) == "Variable a should be less than variable b"


def test_condition_parser_forms():
    assert parse_condition("s < spp") == Ult(Var("s"), Var("spp"))
    assert parse_condition("p") == Ne(Var("p"), IntConst(0))
    assert parse_condition("a >= b") == Ule(Var("b"), Var("a"))
    assert parse_condition("a + 1 < b") == Ult(Add(Var("a"), IntConst(1)), Var("b"))
    assert parse_condition("(a < b) || (b < a)") == Or(
        Ult(Var("a"), Var("b")), Ult(Var("b"), Var("a"))
    )
    with pytest.raises(ConditionParseError):
        parse_condition("a <")
    with pytest.raises(ConditionParseError):
        parse_condition("")


def test_describe_condition_phrasing():
    assert describe_condition(parse_condition("s < spp")) == "s is less than spp"
    assert describe_condition(parse_condition("x != 0")) == "x is not equal to 0"
    assert describe_condition(parse_condition("a > 2")) == "a is greater than 2"
