from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from ptyterm.multidist import MultiDist
from ptyterm.semantics import (EvaluationError, OpenTermError, StateLimitExceeded,
                               approximants, et_approx, evaluate, lift, p_approx, step)
from ptyterm.syntax import Mode, parse

from strategies import closed_terms

I = parse(r"\y. y")


def test_beta_and_choice(named):
    assert step(parse(r"(\x. x) (\y. y)")) == MultiDist.dirac(I)
    assert step(parse(r"(\y. y) (+) (\z. z z)")) == MultiDist.of((F(1, 2), I), (F(1, 2), parse(r"\z. z z")))
    assert step(I) is None


def test_let_rules():
    assert step(parse(r"let x = \y. y in x x")) == MultiDist.dirac(parse(r"(\y. y) (\y. y)"))
    t = parse(r"let x = (\y. y) (+) (\y. y y) in x")
    assert step(t) == MultiDist.of((F(1, 2), parse(r"let x = \y. y in x")),
                                   (F(1, 2), parse(r"let x = \y. y y in x")))


def test_cbn_fires_on_any_argument_and_reduces_heads():
    t = parse(r"(\x. \y. y) ((\z. z z) (\z. z z))", Mode.CBN)
    assert step(t, Mode.CBN) == MultiDist.dirac(parse(r"\y. y"))
    h = parse(r"((\x. x) (+) (\x. x x)) (\y. y)", Mode.CBN)
    assert len(step(h, Mode.CBN)) == 2


def test_open_terms_rejected():
    with pytest.raises(OpenTermError, match="open term"):
        evaluate(parse("x"), 1)


def test_lift_keeps_values_in_place(named):
    m = MultiDist.of((F(1, 2), I), (F(1, 2), named("omega")))
    assert lift(m) == m


def test_running_example_first_steps(named):
    states = evaluate(named("DD"), 2).states
    D = named("D")
    assert states[1] == MultiDist.dirac(parse(r"(\x. x x (+) (\y. y)) (\x. x x (+) (\y. y)) (+) (\y. y)"))
    assert states[2] == MultiDist.of((F(1, 2), named("DD")), (F(1, 2), I))
    assert D.is_value


def test_limit(named):
    evaluate(named("omega"), 1, limit=1)
    with pytest.raises(StateLimitExceeded):
        evaluate(named("DD"), 2, limit=1)


def test_approximants_of_values_and_divergence(named):
    assert approximants(I, 0) == ([F(1)], [F(0)])
    assert p_approx(named("omega"), 9) == 0 and et_approx(named("omega"), 9) == 9
    assert p_approx(named("I+omega"), 3) == F(1, 2)


def test_stuck_application_is_an_error():
    from ptyterm.syntax import App, Lam, Var
    with pytest.raises(EvaluationError):
        step(App(Lam("x", Var("x")), App(Lam("x", Var("x")), Lam("x", Var("x")))))


@settings(max_examples=150, deadline=None)
@given(closed_terms(Mode.CBV))
def test_evaluation_invariants(t):
    """Mass is preserved, P^k is monotone and eT^k telescopes."""
    trace = evaluate(t, 5)
    ps, ets = approximants(t, 5)
    for j, m in enumerate(trace.states):
        assert m.norm == 1
        assert sum((p for p, s in m.entries if s.is_value), F(0)) == ps[j]
    assert all(a <= b for a, b in zip(ps, ps[1:]))
    assert all(ets[j + 1] - ets[j] == 1 - ps[j] for j in range(5))
