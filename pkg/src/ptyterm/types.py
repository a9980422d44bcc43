"""The three-layer type grammar: arrow types, scaled intersection types and
type (multi)distributions, plus typing contexts.

Call-by-value::

    A      ::= IT -> TD
    IT     ::= [q1 . A1, ..., qn . An]
    TD     ::= <p1 IT1, ..., pn ITn>

Call-by-name swaps the roles of the two multiset layers and adds the atom
``*``::

    A      ::= * | IT -> TD
    IT     ::= [q1 . TD1, ..., qn . TDn]
    TD     ::= <p1 A1, ..., pn An>

Intersections and distributions are stored sorted under a structural order
(probability, then canonical text of the payload).  Repeated entries are
kept as repeated entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union

from .multidist import DomainError, MassOverflow, MultiDist, as_rational, check_scalar
from .sexp import ReadError, Tokens
from .syntax import Mode


class TypeSyntaxError(ValueError):
    pass


class _TypeBase:
    @cached_property
    def canonical_key(self) -> str:
        return format_type(self)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, _TypeBase):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(self.canonical_key)

    def __str__(self) -> str:
        return self.canonical_key

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.canonical_key})"


@dataclass(frozen=True, eq=False, repr=False)
class Star(_TypeBase):
    pass


STAR = Star()


@dataclass(frozen=True, eq=False, repr=False)
class Arrow(_TypeBase):
    domain: "InterType"
    codomain: "TypeDist"


def _sorted(entries: Iterable[tuple[Fraction, object]]) -> tuple:
    return tuple(sorted(entries, key=lambda e: (e[0], e[1].canonical_key)))


@dataclass(frozen=True, eq=False, repr=False)
class InterType(_TypeBase):
    """Multiset of scaled elements; the scales need not sum to at most 1."""

    entries: tuple = ()

    def __post_init__(self):
        for q, _ in self.entries:
            if not isinstance(q, Fraction):
                raise TypeError("scale factors must be Fractions")
            if not 0 < q <= 1:
                raise DomainError(f"scale factor {q} not in (0,1]")
        object.__setattr__(self, "entries", _sorted(self.entries))

    @classmethod
    def of(cls, *pairs) -> "InterType":
        return cls(tuple((as_rational(q), a) for q, a in pairs))

    def __iter__(self) -> Iterator:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __add__(self, other: "InterType") -> "InterType":
        return inter_union(self, other)

    def scale(self, q) -> "InterType":
        return scale_inter(q, self)


class TypeDist(MultiDist, _TypeBase):
    """Multidistribution of types, kept in canonical order."""

    def __init__(self, entries: tuple = ()):
        object.__setattr__(self, "entries", _sorted(entries))
        self.__post_init__()

    @classmethod
    def of(cls, *pairs) -> "TypeDist":
        return cls(tuple((as_rational(p), a) for p, a in pairs))

    @cached_property
    def canonical_key(self) -> str:
        return format_type(self)

    __eq__ = _TypeBase.__eq__
    __hash__ = _TypeBase.__hash__
    __str__ = _TypeBase.__str__
    __repr__ = _TypeBase.__repr__

    def __add__(self, other: "TypeDist") -> "TypeDist":
        return dist_union(self, other)

    def scale(self, q) -> "TypeDist":
        return scale_dist(q, self)


Type = Union[Star, Arrow, InterType, TypeDist]

EMPTY = InterType(())
NULL = TypeDist(())


def inter_union(*parts: InterType) -> InterType:
    entries: tuple = ()
    for a in parts:
        entries += a.entries
    return InterType(entries)


def dist_union(*parts: TypeDist) -> TypeDist:
    entries: tuple = ()
    for a in parts:
        entries += a.entries
    return TypeDist(entries)


def scale_inter(q, a: InterType) -> InterType:
    """``q . [q_i . A_i] = [(q q_i) . A_i]`` for ``q`` in (0,1]."""
    q = check_scalar(q)
    return rescale_inter(q, a)


def rescale_inter(q: Fraction, a: InterType) -> InterType:
    # any positive factor; the resulting scales must stay within (0,1]
    if q == 1:
        return a
    return InterType(tuple((q * s, x) for s, x in a.entries))


def scale_dist(q, s: TypeDist) -> TypeDist:
    q = check_scalar(q)
    return rescale_dist(q, s)


def rescale_dist(q: Fraction, s: TypeDist) -> TypeDist:
    if q == 1:
        return s
    return TypeDist(tuple((q * p, x) for p, x in s.entries))


def singleton(x, q=1) -> InterType:
    return InterType(((Fraction(q), x),))


def dirac(x, p=1) -> TypeDist:
    return TypeDist(((Fraction(p), x),))


def is_tight(s: TypeDist, mode: Mode | str = Mode.CBV) -> bool:
    """Every supported element is ``[]`` (CbV) or ``*`` (CbN); ``<>`` is tight."""
    if not isinstance(s, TypeDist):
        return False
    mode = Mode.coerce(mode)
    target = EMPTY if mode is Mode.CBV else STAR
    return all(x == target for _, x in s.entries)


def norm(s: TypeDist) -> Fraction:
    return s.norm


def tight_dist(probabilities: Iterable, mode: Mode | str = Mode.CBV) -> TypeDist:
    mode = Mode.coerce(mode)
    target = EMPTY if mode is Mode.CBV else STAR
    return TypeDist(tuple((as_rational(p), target) for p in probabilities))


# -- typing contexts ---------------------------------------------------------

class Context(Mapping[str, InterType]):
    """Total map from variables to intersection types; unmapped means ``[]``."""

    __slots__ = ("_items", "_key")

    def __init__(self, bindings: Mapping[str, InterType] | Iterable[tuple[str, InterType]] = ()):
        if isinstance(bindings, Mapping):
            bindings = bindings.items()
        items = {}
        for x, a in bindings:
            if a:
                items[x] = a
        self._items = dict(sorted(items.items()))
        self._key = None

    def __getitem__(self, x: str) -> InterType:
        return self._items[x]

    def get(self, x: str, default=None) -> InterType:
        return self._items.get(x, EMPTY if default is None else default)

    def __iter__(self):
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._items)

    @property
    def canonical_key(self) -> str:
        if self._key is None:
            self._key = "{" + ", ".join(f"{x}: {a}" for x, a in self._items.items()) + "}"
        return self._key

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Context):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(self.canonical_key)

    def __repr__(self) -> str:
        return f"Context({self.canonical_key})"

    __str__ = __repr__

    def union(self, other: "Context") -> "Context":
        return ctx_union(self, other)

    def scale(self, q) -> "Context":
        return scale_ctx(q, self)

    def without(self, x: str) -> "Context":
        return Context((y, a) for y, a in self._items.items() if y != x)

    def extend(self, x: str, a: InterType) -> "Context":
        if x in self._items:
            raise ValueError(f"variable {x} already in context")
        return Context(list(self._items.items()) + [(x, a)])


EMPTY_CTX = Context()


def ctx_union(*parts: Context) -> Context:
    out: dict[str, InterType] = {}
    for g in parts:
        for x, a in g.items():
            out[x] = inter_union(out[x], a) if x in out else a
    return Context(out)


def scale_ctx(q, g: Context) -> Context:
    q = check_scalar(q)
    return rescale_ctx(q, g)


def rescale_ctx(q: Fraction, g: Context) -> Context:
    if q == 1:
        return g
    return Context((x, rescale_inter(q, a)) for x, a in g.items())


# -- mode validation ---------------------------------------------------------

def check_type_mode(t: Type, mode: Mode | str) -> None:
    """Raise ``TypeSyntaxError`` if ``t`` is not a type of the given calculus."""
    mode = Mode.coerce(mode)
    _check(t, mode, None)


def _check(t, mode: Mode, expected: type | None) -> None:
    if expected is not None and not isinstance(t, expected):
        raise TypeSyntaxError(f"{t} is not allowed here in {mode.value} mode")
    if isinstance(t, Star):
        if mode is Mode.CBV:
            raise TypeSyntaxError("* only occurs in CbN types")
    elif isinstance(t, Arrow):
        _check(t.domain, mode, InterType)
        _check(t.codomain, mode, TypeDist)
    elif isinstance(t, InterType):
        for _, x in t.entries:
            _check(x, mode, Arrow if mode is Mode.CBV else TypeDist)
    elif isinstance(t, TypeDist):
        for _, x in t.entries:
            _check(x, mode, InterType if mode is Mode.CBV else (Arrow, Star))
    else:
        raise TypeSyntaxError(f"not a type: {t!r}")


# -- text syntax -------------------------------------------------------------

def format_type(t) -> str:
    if isinstance(t, Star):
        return "*"
    if isinstance(t, Arrow):
        return f"(-> {t.domain.canonical_key} {t.codomain.canonical_key})"
    if isinstance(t, InterType):
        return "[" + ", ".join(f"{q} . {x.canonical_key}" for q, x in t.entries) + "]"
    if isinstance(t, TypeDist):
        return "<" + ", ".join(f"{p} {x.canonical_key}" for p, x in t.entries) + ">"
    raise TypeError(f"not a type: {t!r}")


def _rational(tokens: Tokens) -> Fraction:
    kind, text, pos = tokens.next()
    if kind != "atom":
        raise ReadError(f"expected a rational, found {text!r}", pos)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ReadError(f"bad rational {text!r}", pos) from None


def read_type(tokens: Tokens):
    kind, text, pos = tokens.peek()
    if kind == "*":
        tokens.next()
        return STAR
    if kind == "(":
        tokens.next()
        tokens.expect("->")
        dom = read_type(tokens)
        cod = read_type(tokens)
        tokens.expect(")")
        if not isinstance(dom, InterType) or not isinstance(cod, TypeDist):
            raise ReadError("arrow needs an intersection domain and a distribution codomain", pos)
        return Arrow(dom, cod)
    if kind == "[":
        tokens.next()
        entries = []
        while not tokens.at("]"):
            if entries:
                tokens.expect(",")
            q = _rational(tokens)
            tokens.expect(".")
            entries.append((q, read_type(tokens)))
        tokens.expect("]")
        try:
            return InterType(tuple(entries))
        except DomainError as exc:
            raise ReadError(str(exc), pos) from None
    if kind == "<":
        tokens.next()
        entries = []
        while not tokens.at(">"):
            if entries:
                tokens.expect(",")
            p = _rational(tokens)
            entries.append((p, read_type(tokens)))
        tokens.expect(">")
        try:
            return TypeDist(tuple(entries))
        except (DomainError, MassOverflow) as exc:
            raise ReadError(str(exc), pos) from None
    raise ReadError(f"expected a type, found {text or 'end of input'!r}", pos)


def parse_type(text: str, mode: Mode | str | None = None):
    tokens = Tokens(text)
    t = read_type(tokens)
    tokens.done()
    if mode is not None:
        check_type_mode(t, mode)
    return t
