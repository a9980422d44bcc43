"""Small-step reduction, its lifting to multidistributions, and the
termination-probability / expected-runtime approximants."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

from .multidist import MultiDist, value_mass
from .syntax import App, Choice, Lam, Let, Mode, Term, substitute

HALF = Fraction(1, 2)


class EvaluationError(ValueError):
    pass


class OpenTermError(EvaluationError):
    pass


class StateLimitExceeded(EvaluationError):
    pass


def _require_closed(t: Term) -> None:
    if not t.is_closed:
        names = ", ".join(sorted(t.free_vars))
        raise OpenTermError(f"open term: free variables {names}")


def _step(t: Term, mode: Mode) -> MultiDist | None:
    if t.is_value:
        return None
    if isinstance(t, Choice):
        return MultiDist(((HALF, t.left), (HALF, t.right)))
    if isinstance(t, App):
        if isinstance(t.fun, Lam):
            if mode is Mode.CBN or t.arg.is_value:
                return MultiDist.dirac(substitute(t.fun.body, t.fun.binder, t.arg))
            raise EvaluationError(f"non-value argument in CbV application: {t}")
        if mode is Mode.CBN and not t.fun.is_value:
            inner = _step(t.fun, mode)
            return MultiDist(tuple((p, App(n, t.arg)) for p, n in inner.entries))
        raise EvaluationError(f"stuck application: {t}")
    if isinstance(t, Let):
        if mode is Mode.CBN:
            raise EvaluationError("let is not part of the CbN calculus")
        if t.bound.is_value:
            return MultiDist.dirac(substitute(t.body, t.binder, t.bound))
        inner = _step(t.bound, mode)
        return MultiDist(tuple((p, Let(t.binder, n, t.body)) for p, n in inner.entries))
    raise EvaluationError(f"cannot reduce {t!r}")


def step(t: Term, mode: Mode | str = Mode.CBV) -> MultiDist | None:
    """One reduction step of a closed term; ``None`` on values."""
    _require_closed(t)
    return _step(t, Mode.coerce(mode))


def lift(m: MultiDist, mode: Mode | str = Mode.CBV) -> MultiDist:
    """Reduce every non-value entry of ``m`` once; values are kept in place."""
    mode = Mode.coerce(mode)
    entries = []
    for p, t in m.entries:
        _require_closed(t)
        nxt = _step(t, mode)
        if nxt is None:
            entries.append((p, t))
        else:
            entries.extend((p * q, s) for q, s in nxt.entries)
    return MultiDist(tuple(entries))


def default_limit() -> int | None:
    raw = os.environ.get("PTYTERM_LIMIT")
    return int(raw) if raw else None


@dataclass(frozen=True)
class ReductionTrace:
    start: Term
    states: tuple[MultiDist, ...]

    @property
    def fired_mass(self) -> tuple[Fraction, ...]:
        return tuple(1 - value_mass(m) for m in self.states)

    def __len__(self) -> int:
        return len(self.states)


def evaluate(t: Term, k: int, mode: Mode | str = Mode.CBV,
             limit: int | None = None) -> ReductionTrace:
    """The first ``k`` lifting steps from ``<1 t>``.

    Entries are never merged; ``limit`` bounds the number of entries of any
    state and raises ``StateLimitExceeded`` when crossed.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    _require_closed(t)
    mode = Mode.coerce(mode)
    m = MultiDist.dirac(t)
    states = [m]
    for _ in range(k):
        m = lift(m, mode)
        if limit is not None and len(m) > limit:
            raise StateLimitExceeded(
                f"multidistribution has {len(m)} entries, above the limit of {limit}")
        states.append(m)
    return ReductionTrace(t, tuple(states))


def approximants(t: Term, k: int, mode: Mode | str = Mode.CBV) -> tuple[list[Fraction], list[Fraction]]:
    """Lists ``[P^0..P^k]`` and ``[eT^0..eT^k]``.

    Works on the collapsed distribution: value mass is linear in the state,
    so merging alpha-equal terms leaves every approximant unchanged.
    """
    _require_closed(t)
    mode = Mode.coerce(mode)
    state: dict[Term, Fraction] = {t: Fraction(1)}
    ps: list[Fraction] = []
    ets: list[Fraction] = [Fraction(0)]
    for j in range(k + 1):
        done = sum((p for s, p in state.items() if s.is_value), Fraction(0))
        ps.append(done)
        if j == k:
            break
        ets.append(ets[-1] + 1 - done)
        nxt: dict[Term, Fraction] = {}
        for s, p in state.items():
            red = _step(s, mode)
            if red is None:
                nxt[s] = nxt.get(s, Fraction(0)) + p
            else:
                for q, s2 in red.entries:
                    nxt[s2] = nxt.get(s2, Fraction(0)) + p * q
        state = nxt
    return ps, ets


def p_approx(t: Term, k: int, mode: Mode | str = Mode.CBV) -> Fraction:
    """Probability that ``t`` reaches a value within ``k`` steps."""
    return approximants(t, k, mode)[0][k]


def et_approx(t: Term, k: int, mode: Mode | str = Mode.CBV) -> Fraction:
    """``sum_{j<k} (1 - P^j(t))``."""
    return approximants(t, k, mode)[1][k]
