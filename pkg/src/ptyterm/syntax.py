"""Terms of the probabilistic lambda calculi, their concrete syntax and substitution.

Two calculi share one AST.  In call-by-value mode terms are in A-normal
form (applications take values only, sequencing goes through ``let``); in
call-by-name mode ``let`` is absent and applications are unrestricted.

Term equality (``==`` and ``hash``) is alpha-equivalence.  Names are kept
for printing and for the typing contexts of derivations.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Union


class Mode(enum.Enum):
    CBV = "cbv"
    CBN = "cbn"

    @classmethod
    def coerce(cls, mode: Union["Mode", str]) -> "Mode":
        if isinstance(mode, Mode):
            return mode
        return cls(str(mode).lower())


class SyntaxError_(ValueError):
    """Raised on malformed source text; carries the offending position."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


RESERVED_PREFIX = "_g"


class Term:
    """Base class of the AST.  Subclasses are immutable."""

    __slots__ = ()

    @cached_property
    def alpha_key(self) -> str:
        return _debruijn(self, ())

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        return self.alpha_key == other.alpha_key

    def __hash__(self) -> int:
        return hash(self.alpha_key)

    def __str__(self) -> str:
        return format_term(self)

    @property
    def is_value(self) -> bool:
        return isinstance(self, (Var, Lam))

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return frozenset(_free_vars(self))

    @property
    def is_closed(self) -> bool:
        return not self.free_vars


@dataclass(frozen=True, eq=False, repr=False)
class Var(Term):
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Lam(Term):
    binder: str
    body: Term

    def __repr__(self) -> str:
        return f"Lam({self.binder!r}, {self.body!r})"


@dataclass(frozen=True, eq=False, repr=False)
class App(Term):
    fun: Term
    arg: Term

    def __repr__(self) -> str:
        return f"App({self.fun!r}, {self.arg!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Choice(Term):
    left: Term
    right: Term

    def __repr__(self) -> str:
        return f"Choice({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Let(Term):
    binder: str
    bound: Term
    body: Term

    def __repr__(self) -> str:
        return f"Let({self.binder!r}, {self.bound!r}, {self.body!r})"


Value = Union[Var, Lam]


def is_value(t: Term) -> bool:
    return isinstance(t, (Var, Lam))


# -- alpha-equivalence and free variables -----------------------------------

def _debruijn(t: Term, env: tuple[str, ...]) -> str:
    # env lists binders innermost-first
    if isinstance(t, Var):
        try:
            return f"#{env.index(t.name)}"
        except ValueError:
            return t.name
    if isinstance(t, Lam):
        return f"(L {_debruijn(t.body, (t.binder,) + env)})"
    if isinstance(t, App):
        return f"(A {_debruijn(t.fun, env)} {_debruijn(t.arg, env)})"
    if isinstance(t, Choice):
        return f"(C {_debruijn(t.left, env)} {_debruijn(t.right, env)})"
    if isinstance(t, Let):
        return f"(E {_debruijn(t.bound, env)} {_debruijn(t.body, (t.binder,) + env)})"
    raise TypeError(f"not a term: {t!r}")


def _free_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Lam):
        return set(t.body.free_vars) - {t.binder}
    if isinstance(t, (App, Choice)):
        a, b = (t.fun, t.arg) if isinstance(t, App) else (t.left, t.right)
        return set(a.free_vars) | set(b.free_vars)
    if isinstance(t, Let):
        return set(t.bound.free_vars) | (set(t.body.free_vars) - {t.binder})
    raise TypeError(f"not a term: {t!r}")


def free_vars(t: Term) -> frozenset[str]:
    return t.free_vars


def alpha_equal(a: Term, b: Term) -> bool:
    return a.alpha_key == b.alpha_key


def syntactic_equal(a: Term, b: Term) -> bool:
    """Equality including binder names."""
    if a is b:
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        return a.name == b.name
    if isinstance(a, Lam):
        return a.binder == b.binder and syntactic_equal(a.body, b.body)
    if isinstance(a, App):
        return syntactic_equal(a.fun, b.fun) and syntactic_equal(a.arg, b.arg)
    if isinstance(a, Choice):
        return syntactic_equal(a.left, b.left) and syntactic_equal(a.right, b.right)
    return (a.binder == b.binder and syntactic_equal(a.bound, b.bound)
            and syntactic_equal(a.body, b.body))


def all_names(t: Term) -> set[str]:
    """Every identifier occurring in ``t``, bound or free."""
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Lam):
        return {t.binder} | all_names(t.body)
    if isinstance(t, App):
        return all_names(t.fun) | all_names(t.arg)
    if isinstance(t, Choice):
        return all_names(t.left) | all_names(t.right)
    return {t.binder} | all_names(t.bound) | all_names(t.body)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Lam):
        yield from subterms(t.body)
    elif isinstance(t, App):
        yield from subterms(t.fun)
        yield from subterms(t.arg)
    elif isinstance(t, Choice):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, Let):
        yield from subterms(t.bound)
        yield from subterms(t.body)


def size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


# -- substitution ------------------------------------------------------------

def fresh_name(base: str, avoid: set[str] | frozenset[str]) -> str:
    stem = base.rstrip("'0123456789") or "v"
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


def substitute(body: Term, var: str, value: Term) -> Term:
    """Capture-avoiding ``body{value/var}``.

    Binders are renamed only when they would capture a free variable of
    ``value``; substituting a closed term never renames.
    """
    fv = value.free_vars
    return _subst(body, var, value, fv)


def _subst(t: Term, x: str, v: Term, fv: frozenset[str]) -> Term:
    if x not in t.free_vars:
        return t
    if isinstance(t, Var):
        return v
    if isinstance(t, App):
        return App(_subst(t.fun, x, v, fv), _subst(t.arg, x, v, fv))
    if isinstance(t, Choice):
        return Choice(_subst(t.left, x, v, fv), _subst(t.right, x, v, fv))
    if isinstance(t, Lam):
        binder, body = _avoid_capture(t.binder, t.body, fv, x)
        return Lam(binder, _subst(body, x, v, fv))
    if isinstance(t, Let):
        bound = _subst(t.bound, x, v, fv)
        if t.binder == x:
            return Let(t.binder, bound, t.body)
        binder, body = _avoid_capture(t.binder, t.body, fv, x)
        return Let(binder, bound, _subst(body, x, v, fv))
    raise TypeError(f"not a term: {t!r}")


def _avoid_capture(binder: str, body: Term, fv: frozenset[str], x: str) -> tuple[str, Term]:
    if binder not in fv:
        return binder, body
    new = fresh_name(binder, set(fv) | all_names(body) | {x})
    return new, _subst(body, binder, Var(new), frozenset({new}))


# -- well-formedness ---------------------------------------------------------

def check_mode(t: Term, mode: Mode | str) -> None:
    """Raise ``SyntaxError_`` unless ``t`` belongs to the calculus of ``mode``."""
    mode = Mode.coerce(mode)
    for s in subterms(t):
        if mode is Mode.CBV and isinstance(s, App):
            if not (s.fun.is_value and s.arg.is_value):
                raise SyntaxError_(f"non-value application in CbV mode: {format_term(s)}")
        if mode is Mode.CBN and isinstance(s, Let):
            raise SyntaxError_("let is not part of the CbN calculus")


def is_anf(t: Term) -> bool:
    try:
        check_mode(t, Mode.CBV)
    except SyntaxError_:
        return False
    return True


# -- printing ----------------------------------------------------------------

def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lam):
        return f"\\{t.binder}. {format_term(t.body)}"
    if isinstance(t, Let):
        return f"let {t.binder} = {format_term(t.bound)} in {format_term(t.body)}"
    if isinstance(t, Choice):
        left = format_term(t.left)
        if isinstance(t.left, (Lam, Let)):
            left = f"({left})"
        right = format_term(t.right)
        if isinstance(t.right, (Lam, Let, Choice)):
            right = f"({right})"
        return f"{left} (+) {right}"
    if isinstance(t, App):
        fun = format_term(t.fun)
        if not isinstance(t.fun, (Var, App)):
            fun = f"({fun})"
        arg = format_term(t.arg)
        if not isinstance(t.arg, Var):
            arg = f"({arg})"
        return f"{fun} {arg}"
    raise TypeError(f"not a term: {t!r}")


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<plus>\(\+\)|⊕)
  | (?P<lam>\\|λ)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[().=])
""", re.VERBOSE)

_KEYWORDS = {"let", "in"}


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise SyntaxError_(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        text = m.group()
        if kind == "ident" and text in _KEYWORDS:
            kind = text
        elif kind == "punct":
            kind = text
        if kind != "ws":
            out.append((kind, text, pos))
        pos = m.end()
    out.append(("eof", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str, mode: Mode, desugar: bool):
        self.toks = _tokenize(src)
        self.i = 0
        self.mode = mode
        self.desugar = desugar
        self.counter = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        if tok[0] != kind:
            what = tok[1] or "end of input"
            raise SyntaxError_(f"expected {kind!r}, found {what!r}", tok[2])
        self.i += 1
        return tok

    def ident(self) -> str:
        _, name, pos = self.take("ident")
        if self.desugar and name.startswith(RESERVED_PREFIX):
            raise SyntaxError_(f"identifier {name!r} uses the reserved prefix {RESERVED_PREFIX!r}", pos)
        return name

    def fresh(self) -> str:
        name = f"{RESERVED_PREFIX}{self.counter}"
        self.counter += 1
        return name

    # term ::= choice ; choice ::= app ((+) app)* ; lambda and let extend right
    def term(self) -> Term:
        left = self.operand()
        while self.peek()[0] == "plus":
            self.i += 1
            right = self.operand()
            left = Choice(left, right)
        return left

    def operand(self) -> Term:
        kind = self.peek()[0]
        if kind == "lam":
            self.i += 1
            x = self.ident()
            self.take(".")
            return Lam(x, self.term())
        if kind == "let":
            _, _, pos = self.take("let")
            if self.mode is Mode.CBN:
                raise SyntaxError_("let is not part of the CbN calculus", pos)
            x = self.ident()
            self.take("=")
            bound = self.term()
            self.take("in")
            return Let(x, bound, self.term())
        return self.application()

    def application(self) -> Term:
        pos = self.peek()[2]
        head = self.atom()
        while True:
            kind = self.peek()[0]
            if kind in ("ident", "("):
                arg = self.atom()
                head = self.make_app(head, arg, pos)
            elif kind in ("lam", "let"):
                # a trailing abstraction/let argument extends to the right
                arg = self.operand()
                return self.make_app(head, arg, pos)
            else:
                return head

    def atom(self) -> Term:
        kind, _, pos = self.peek()
        if kind == "ident":
            return Var(self.ident())
        if kind == "(":
            self.i += 1
            t = self.term()
            self.take(")")
            return t
        what = self.peek()[1] or "end of input"
        raise SyntaxError_(f"expected a term, found {what!r}", pos)

    def make_app(self, fun: Term, arg: Term, pos: int) -> Term:
        if self.mode is Mode.CBN or (fun.is_value and arg.is_value):
            return App(fun, arg)
        if not self.desugar:
            raise SyntaxError_("non-value application in CbV mode", pos)
        # M N  ~>  let f = M in let a = N in f a, binding only non-values
        bindings = []
        if not fun.is_value:
            f = self.fresh()
            bindings.append((f, fun))
            fun = Var(f)
        if not arg.is_value:
            a = self.fresh()
            bindings.append((a, arg))
            arg = Var(a)
        out: Term = App(fun, arg)
        for name, bound in reversed(bindings):
            out = Let(name, bound, out)
        return out


def parse(source: str, mode: Mode | str = Mode.CBV, desugar: bool = False) -> Term:
    """Parse concrete syntax into a ``Term``.

    ``(+)`` (or ``⊕``) is left-associative and binds looser than
    application; ``\\x.`` and ``let`` extend as far right as possible.
    """
    p = _Parser(source, Mode.coerce(mode), desugar)
    t = p.term()
    kind, text, pos = p.peek()
    if kind != "eof":
        raise SyntaxError_(f"unexpected {text!r}", pos)
    return t
