from fractions import Fraction as F

import pytest

from ptyterm.derivation import DerivationError, check_derivation, size, zero
from ptyterm.semantics import OpenTermError, approximants, step
from ptyterm.syntax import Mode, parse, substitute
from ptyterm.transform import (anti_substitute, null_complete, subject_expand, subject_reduce,
                               substitute_derivation, tight_complete)
from ptyterm.types import NULL, dist_union, rescale_dist


def test_substitution_lemma_on_the_running_example(golden):
    body = golden("sigma3").premises[0]
    theta = golden("theta2")
    out = substitute_derivation(body, "x", theta)
    D = golden("sigma3").term
    assert out.term == substitute(body.term, "x", D)
    assert out.weight == body.weight + theta.weight
    assert out.rhs == body.rhs and not out.context
    check_derivation(out)


def test_anti_substitution_inverts_substitution(golden):
    body = golden("sigma3").premises[0]
    theta = golden("theta2")
    out = substitute_derivation(body, "x", theta)
    inter, skel, val = anti_substitute(out, body.term, "x", theta.term)
    assert inter == theta.rhs
    assert skel.weight + val.weight == out.weight
    assert skel.context.get("x") == inter
    check_derivation(skel)
    check_derivation(val)


def test_substitution_type_mismatch(golden):
    body = golden("sigma3").premises[0]
    with pytest.raises(DerivationError, match="type mismatch"):
        substitute_derivation(body, "x", golden("sigma1").premises[0].premises[1].premises[0])


def test_subject_reduction_on_phi3(golden):
    phi = golden("phi3")
    branches = subject_reduce(phi)
    assert len(branches) == 1
    (b,) = branches
    assert b.weight == phi.weight - 1 and b.rhs == phi.rhs
    assert size(b) < size(phi)
    back = subject_expand(branches, phi.term)
    assert back.exact and back.weight == phi.weight


def test_subject_reduction_of_a_choice(golden):
    t = parse(r"(\x. x) (+) ((\x. x) (\y. y))")
    d = tight_complete(t, 3)
    parts = subject_reduce(d)
    assert [p.term for p in parts] == [p for _, p in step(t).entries]
    assert d.weight == 1 + sum(F(1, 2) * p.weight for p in parts)
    assert dist_union(*(rescale_dist(F(1, 2), p.rhs) for p in parts)) == d.rhs


def test_zero_weight_cannot_reduce(named):
    with pytest.raises(DerivationError, match="weight is zero"):
        subject_reduce(zero(named("omega")))


def test_expansion_of_let_with_only_zero_branches():
    t = parse(r"let x = (\y. y y) (\y. y y) in x")
    pis = [zero(s) for _, s in step(t).entries]
    res = subject_expand(pis, t)
    assert res.holds and res.derivation.rhs == NULL


def test_expansion_branch_mismatch(named):
    with pytest.raises(DerivationError, match="mismatch"):
        subject_expand([zero(named("I"))], named("DD"))


@pytest.mark.parametrize("mode", [Mode.CBV, Mode.CBN])
def test_running_example_synthesis(named, mode):
    dd = named("DD", mode)
    for k in range(9):
        ps, ets = approximants(dd, k, mode)
        d = tight_complete(dd, k, mode)
        assert d.rhs.norm == ps[k] and d.weight >= ets[k]
        n = null_complete(dd, k, mode)
        assert n.rhs == NULL and n.weight >= ets[k]
    assert tight_complete(dd, 6).weight == F(7, 2)


def test_omega_null_weights_grow(named):
    ws = [null_complete(named("omega"), k).weight for k in range(1, 11)]
    assert all(w >= k for k, w in enumerate(ws, 1))


def test_synthesis_rejects_open_terms_and_bad_k():
    with pytest.raises(OpenTermError):
        tight_complete(parse("x"), 2)
    with pytest.raises(ValueError):
        tight_complete(parse(r"\x. x"), -1)
