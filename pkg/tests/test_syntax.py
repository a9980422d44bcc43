import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptyterm.syntax import (App, Choice, Lam, Let, Mode, SyntaxError_, Var, alpha_equal,
                            check_mode, format_term, free_vars, is_anf, parse, substitute,
                            syntactic_equal)

from strategies import closed_terms, open_terms


def test_parse_basic_forms():
    assert parse(r"\x. x") == Lam("x", Var("x"))
    assert parse(r"λx. x ⊕ x") == Lam("x", Choice(Var("x"), Var("x")))
    assert parse("let y = (\\x. x) (\\x. x) in y") == Let(
        "y", App(Lam("x", Var("x")), Lam("x", Var("x"))), Var("y"))


def test_choice_is_left_associative():
    t = parse("a (+) b (+) c", Mode.CBN)
    assert t == Choice(Choice(Var("a"), Var("b")), Var("c"))


def test_trailing_abstraction_argument():
    t = parse(r"f \x. x", Mode.CBN)
    assert t == App(Var("f"), Lam("x", Var("x")))


def test_cbv_rejects_non_value_application():
    with pytest.raises(SyntaxError_, match="non-value application in CbV mode"):
        parse(r"(\x. x) ((\y. y) (\z. z))")


def test_desugar_binds_only_non_values():
    t = parse(r"(\x. x) ((\y. y) (\z. z))", desugar=True)
    assert isinstance(t, Let) and t.bound == parse(r"(\y. y) (\z. z)")
    assert isinstance(t.body, App) and t.body.fun == Lam("x", Var("x"))
    assert is_anf(t)


def test_reserved_prefix_only_rejected_when_desugaring():
    assert parse(r"\_g0. _g0") == Lam("z", Var("z"))
    with pytest.raises(SyntaxError_, match="reserved prefix"):
        parse(r"\_g0. _g0", desugar=True)


def test_cbn_rejects_let():
    with pytest.raises(SyntaxError_, match="let is not part of the CbN calculus"):
        parse("let x = y in x", Mode.CBN)
    with pytest.raises(SyntaxError_):
        check_mode(parse("let x = y in x"), Mode.CBN)


@pytest.mark.parametrize("bad", ["", r"\x x", "(a", "a)", "let x = a", "a # b"])
def test_malformed_input_reports_position(bad):
    with pytest.raises(SyntaxError_):
        parse(bad, Mode.CBN)


def test_alpha_equality_and_names():
    a, b = parse(r"\x. \y. x y"), parse(r"\u. \v. u v")
    assert a == b and hash(a) == hash(b) and alpha_equal(a, b)
    assert not syntactic_equal(a, b)
    assert parse(r"\x. \y. x") != parse(r"\x. \y. y")


def test_free_variables():
    assert free_vars(parse(r"\x. x y z", Mode.CBN)) == {"y", "z"}
    assert free_vars(parse("let x = x in x")) == {"x"}


def test_substitution_avoids_capture():
    t = substitute(parse(r"\y. x y"), "x", Var("y"))
    assert t == parse(r"\w. y w")
    assert substitute(parse(r"\x. x"), "x", Var("z")) == parse(r"\x. x")
    assert substitute(parse("let x = x in x"), "x", Var("q")) == parse("let x = q in x")


def test_closed_substitution_never_renames():
    t = parse(r"\y. x y")
    out = substitute(t, "x", parse(r"\y. y"))
    assert syntactic_equal(out, parse(r"\y. (\y. y) y"))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([Mode.CBV, Mode.CBN]).flatmap(lambda m: st.tuples(st.just(m), open_terms(m))))
def test_print_parse_round_trip(case):
    mode, t = case
    back = parse(format_term(t), mode)
    assert syntactic_equal(back, t)


@settings(max_examples=100, deadline=None)
@given(open_terms(Mode.CBV), closed_terms(Mode.CBV, values_only=True))
def test_substitution_removes_variable(t, v):
    out = substitute(t, "x0", v)
    assert "x0" not in out.free_vars
    assert out.free_vars == t.free_vars - {"x0"}
