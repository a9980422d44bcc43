import pytest

from ptyterm import stdlib
from ptyterm.multidist import MultiDist
from ptyterm.semantics import evaluate
from ptyterm.syntax import Mode, format_term, is_anf, parse
from ptyterm.stdlib import (app_chain, lookup, scott_numeral, scott_tuple, succ_wrapper,
                            z_applied, z_unfolded)


@pytest.mark.parametrize("entry", stdlib.entries(), ids=lambda e: e.name)
def test_named_terms_print_and_reparse(entry):
    for mode in entry.modes:
        t = entry.term(mode)
        assert t.is_closed
        assert parse(format_term(t), mode) == t


def test_lookup():
    assert "DD" in stdlib.names()
    with pytest.raises(KeyError):
        lookup("nope")
    with pytest.raises(KeyError, match="not a cbn term"):
        lookup("CC").term(Mode.CBN)


def test_numerals_are_closed_values():
    for n in range(65):
        t = scott_numeral(n)
        assert t.is_value and t.is_closed
    assert scott_numeral(0) == lookup("scott0").term("cbv")


@pytest.mark.parametrize("n", range(17))
def test_successor_in_constant_steps(n):
    states = evaluate(succ_wrapper(scott_numeral(n)), 2).states
    assert states[2] == MultiDist.dirac(scott_numeral(n + 1))


def test_tuples_and_chains():
    tup = scott_tuple([scott_numeral(0), scott_numeral(1)])
    assert tup.is_value and tup.is_closed
    chain = app_chain(parse(r"\a. \b. a"), [parse(r"\u. u"), parse(r"\v. v")])
    assert is_anf(chain)
    assert evaluate(chain, 3).states[3] == MultiDist.dirac(parse(r"\u. u"))
    with pytest.raises(ValueError):
        scott_tuple([parse("x")])


@pytest.mark.parametrize("mode", [Mode.CBV, Mode.CBN])
@pytest.mark.parametrize("v", [r"\x. x", r"\f. \n. f n", r"\a. a a"])
def test_fixpoint_never_a_value_before_unfolding(mode, v):
    v = parse(v, mode)
    target = MultiDist.dirac(z_unfolded(v, mode))
    states = evaluate(z_applied(v, mode), 3, mode).states
    hit = next(j for j, m in enumerate(states) if m == target)
    assert hit == (3 if mode is Mode.CBV else 2)
    assert all(not s.is_value for m in states[:hit] for _, s in m.entries)
