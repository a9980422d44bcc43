"""Finite multidistributions with exact rational weights.

A multidistribution is a multiset of ``(p, item)`` pairs with ``p`` in
(0, 1] and total mass at most 1.  Equal pairs are kept apart: this is
what distinguishes a multidistribution from a (sub)distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Generic, Iterable, Iterator, TypeVar, Union

T = TypeVar("T")
U = TypeVar("U")

Rational = Fraction
RationalLike = Union[Fraction, int, str]


class MassOverflow(ValueError):
    pass


class DomainError(ValueError):
    pass


def as_rational(q: RationalLike) -> Fraction:
    if isinstance(q, float):
        raise TypeError("floating point probabilities are not accepted")
    return Fraction(q)


def check_scalar(q: RationalLike) -> Fraction:
    q = as_rational(q)
    if not 0 < q <= 1:
        raise DomainError(f"scale factor {q} not in (0,1]")
    return q


def format_rational(q: Fraction) -> str:
    return str(Fraction(q))


def canonical_key(item: object) -> str:
    """Structural sort key for payloads (terms, types, ...)."""
    key = getattr(item, "canonical_key", None)
    if key is None:
        key = getattr(item, "alpha_key", None)
    if key is None:
        key = repr(item)
    return key


@dataclass(frozen=True, eq=False)
class MultiDist(Generic[T]):
    entries: tuple[tuple[Fraction, T], ...] = ()

    def __post_init__(self):
        total = Fraction(0)
        for p, _ in self.entries:
            if not isinstance(p, Fraction):
                raise TypeError("probabilities must be Fractions")
            if not 0 < p <= 1:
                raise DomainError(f"probability {p} not in (0,1]")
            total += p
        if total > 1:
            raise MassOverflow(f"mass overflow: norm {total} > 1")
        object.__setattr__(self, "_norm", total)

    @classmethod
    def of(cls, *pairs: tuple[RationalLike, T]) -> "MultiDist[T]":
        return cls(tuple((as_rational(p), x) for p, x in pairs))

    @classmethod
    def dirac(cls, item: T) -> "MultiDist[T]":
        return cls(((Fraction(1), item),))

    @property
    def norm(self) -> Fraction:
        return self._norm

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[Fraction, T]]:
        return iter(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    @property
    def items(self) -> list[T]:
        return [x for _, x in self.entries]

    @cached_property
    def sorted_entries(self) -> tuple[tuple[Fraction, T], ...]:
        return tuple(sorted(self.entries, key=lambda e: (e[0], canonical_key(e[1]))))

    @cached_property
    def canonical_key(self) -> str:
        body = ", ".join(f"{p} {canonical_key(x)}" for p, x in self.sorted_entries)
        return f"<{body}>"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiDist):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(self.canonical_key)

    def __add__(self, other: "MultiDist[T]") -> "MultiDist[T]":
        return mdist_sum(self, other)

    def scale(self, q: RationalLike) -> "MultiDist[T]":
        return mdist_scale(q, self)

    def map(self, f: Callable[[T], U]) -> "MultiDist[U]":
        return MultiDist(tuple((p, f(x)) for p, x in self.entries))

    def collapse(self) -> dict:
        """The underlying subdistribution (equal payloads merged)."""
        out: dict = {}
        for p, x in self.entries:
            out[x] = out.get(x, Fraction(0)) + p
        return out

    def __repr__(self) -> str:
        return f"MultiDist({list(self.entries)!r})"

    def __str__(self) -> str:
        return "<" + ", ".join(f"{p} {x}" for p, x in self.entries) + ">"


ZERO: MultiDist = MultiDist(())


def mdist_sum(a: MultiDist[T], b: MultiDist[T]) -> MultiDist[T]:
    if a.norm + b.norm > 1:
        raise MassOverflow(f"mass overflow: {a.norm} + {b.norm} > 1")
    return MultiDist(a.entries + b.entries)


def mdist_union(parts: Iterable[MultiDist[T]]) -> MultiDist[T]:
    entries: tuple = ()
    for m in parts:
        entries += m.entries
    return MultiDist(entries)


def mdist_scale(q: RationalLike, m: MultiDist[T]) -> MultiDist[T]:
    q = check_scalar(q)
    if q == 1:
        return m
    return MultiDist(tuple((q * p, x) for p, x in m.entries))


def value_mass(m: MultiDist) -> Fraction:
    """Probability that ``m`` is a value (payloads must be terms)."""
    return sum((p for p, t in m.entries if t.is_value), Fraction(0))
