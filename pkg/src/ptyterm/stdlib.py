"""Named example terms and small encodings (Scott numerals and tuples,
successor, a fixed-point combinator)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .syntax import App, Lam, Let, Mode, Term, Var, all_names, fresh_name, parse


def app_chain(head: Term, args: Sequence[Term], mode: Mode | str = Mode.CBV) -> Term:
    """``head a1 ... an``; in call-by-value non-value heads are bound by ``let``."""
    mode = Mode.coerce(mode)
    acc = head
    avoid = all_names(head).union(*(all_names(a) for a in args))
    for a in args:
        if mode is Mode.CBN or (acc.is_value and a.is_value):
            acc = App(acc, a)
            continue
        if not a.is_value:
            raise ValueError("call-by-value arguments must be values")
        g = fresh_name("f", avoid)
        avoid.add(g)
        acc = Let(g, acc, App(Var(g), a))
    return acc


def scott_numeral(n: int) -> Term:
    """Unary Scott encoding: ``0 = \\x1. \\y. y`` and ``n+1 = \\x1. \\y. x1 n``."""
    if n < 0:
        raise ValueError("numerals are non-negative")
    t: Term = Lam("x1", Lam("y", Var("y")))
    for _ in range(n):
        t = Lam("x1", Lam("y", App(Var("x1"), t)))
    return t


def scott_tuple(values: Sequence[Term], mode: Mode | str = Mode.CBV) -> Term:
    """``\\x. x V1 ... Vn`` for closed values."""
    for v in values:
        if not (v.is_value and v.is_closed):
            raise ValueError("tuple components must be closed values")
    return Lam("x", app_chain(Var("x"), list(values), mode))


SUCC = parse(r"\n. \x1. \y. x1 n")


def succ_wrapper(t: Term) -> Term:
    """``let z = t in SUCC z``."""
    return Let("z", t, App(SUCC, Var("z")))


_Z_HALF = r"\x. \y. y (\z. x x y z)"


def fixpoint_Z(mode: Mode | str = Mode.CBV) -> Term:
    """``M M`` with ``M = \\x. \\y. y (\\z. x x y z)``."""
    mode = Mode.coerce(mode)
    m = parse(_Z_HALF, mode, desugar=mode is Mode.CBV)
    return App(m, m)


def z_applied(v: Term, mode: Mode | str = Mode.CBV) -> Term:
    """``Z V``."""
    return app_chain(fixpoint_Z(mode), [v], mode)


def z_unfolded(v: Term, mode: Mode | str = Mode.CBV) -> Term:
    """``V (\\x. Z V x)``, the term ``Z V`` unfolds to."""
    mode = Mode.coerce(mode)
    z = fixpoint_Z(mode)
    x = fresh_name("x", all_names(v) | all_names(z))
    return App(v, Lam(x, app_chain(z, [v, Var(x)], mode)))


@dataclass(frozen=True)
class NamedTerm:
    name: str
    modes: tuple[Mode, ...]
    notes: str
    terms: dict = field(repr=False, compare=False, default_factory=dict)

    def term(self, mode: Mode | str = Mode.CBV) -> Term:
        mode = Mode.coerce(mode)
        if mode not in self.modes:
            raise KeyError(f"{self.name} is not a {mode.value} term")
        return self.terms[mode]

    @property
    def mode_label(self) -> str:
        return "both" if len(self.modes) == 2 else self.modes[0].value


BOTH = (Mode.CBV, Mode.CBN)
_REGISTRY: dict[str, NamedTerm] = {}


def _register(name: str, notes: str, source: str | None = None, modes=BOTH, build=None) -> None:
    terms = {}
    for m in modes:
        terms[m] = build(m) if build is not None else parse(source, m)
    _REGISTRY[name] = NamedTerm(name, tuple(modes), notes, terms)


_I = r"\x. x"
_DELTA = r"\x. x x"
_D = r"\x. x x (+) (\y. y)"
_C = r"\x. (let z = x x in (\n. \x1. \y. x1 n) z) (+) (\x1. \y. y)"

_register("I", "identity", _I)
_register("Delta", "self application", _DELTA)
_register("D", "self application or identity, each with probability 1/2", _D)
_register("DD", "the running example: D applied to itself", f"({_D}) ({_D})")
_register("omega", "the diverging term Delta Delta", f"({_DELTA}) ({_DELTA})")
_register("I+omega", "terminates with probability 1/2, infinite expected runtime",
          f"({_I}) (+) (({_DELTA}) ({_DELTA}))")
_register("scott0", "Scott numeral zero", r"\x1. \y. y")
_register("SUCC", "successor on Scott numerals", r"\n. \x1. \y. x1 n")
_register("Z", "fixed-point combinator M M", build=fixpoint_Z)
_register("C", "x |-> succ(x x) (+) 0", _C, modes=(Mode.CBV,))
_register("CC", "a geometric counter with expected runtime 4 + K", f"({_C}) ({_C})",
          modes=(Mode.CBV,))


def lookup(name: str) -> NamedTerm:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown stdlib term {name!r}") from None


def names() -> list[str]:
    return list(_REGISTRY)


def entries() -> list[NamedTerm]:
    return list(_REGISTRY.values())
