from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptyterm.multidist import (ZERO, DomainError, MassOverflow, MultiDist, mdist_scale,
                               mdist_sum, mdist_union)

probs = st.fractions(min_value=F(1, 64), max_value=1, max_denominator=64)


def test_duplicates_are_kept():
    m = MultiDist.of((F(1, 4), "a"), (F(1, 4), "a"))
    assert len(m) == 2 and m.norm == F(1, 2)
    assert m != MultiDist.of((F(1, 2), "a"))
    assert m.collapse() == {"a": F(1, 2)}


def test_equality_ignores_order():
    assert MultiDist.of((F(1, 4), "a"), (F(1, 2), "b")) == MultiDist.of((F(1, 2), "b"), (F(1, 4), "a"))


def test_invariants_enforced():
    with pytest.raises(MassOverflow, match="mass overflow"):
        MultiDist.of((F(3, 4), "a"), (F(1, 2), "b"))
    with pytest.raises(DomainError):
        MultiDist.of((F(0), "a"))
    with pytest.raises(TypeError):
        MultiDist.of((0.5, "a"))


def test_sum_and_scale():
    a, b = MultiDist.of((F(1, 2), "x")), MultiDist.of((F(1, 4), "y"))
    assert (a + b).norm == F(3, 4)
    with pytest.raises(MassOverflow):
        mdist_sum(a, MultiDist.of((F(3, 4), "z")))
    assert mdist_scale(F(1, 2), a) == MultiDist.of((F(1, 4), "x"))
    assert mdist_scale(1, a) is a
    with pytest.raises(DomainError):
        mdist_scale(F(3, 2), a)
    assert ZERO.norm == 0 and str(ZERO) == "<>"


@given(st.lists(probs, max_size=6), probs)
def test_scaling_is_linear_in_norm(ps, q):
    total = sum(ps, F(0))
    if total > 1:
        return
    m = MultiDist(tuple((p, i) for i, p in enumerate(ps)))
    assert mdist_scale(q, m).norm == q * m.norm
    assert len(mdist_scale(q, m)) == len(m)


@given(st.lists(probs, max_size=4), st.lists(probs, max_size=4))
def test_union_norm_and_size(ps, qs):
    if sum(ps, F(0)) > 1 or sum(qs, F(0)) > 1:
        return
    a = MultiDist(tuple((p, "a") for p in ps))
    b = MultiDist(tuple((q, "b") for q in qs))
    if a.norm + b.norm > 1:
        with pytest.raises(MassOverflow):
            mdist_union([a, b])
        return
    u = mdist_union([a, b])
    assert u.norm == a.norm + b.norm and len(u) == len(a) + len(b)
