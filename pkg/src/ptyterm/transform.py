"""Derivation transformations: substitution and anti-substitution of values,
weighted subject reduction and expansion, and synthesis of tight and null
derivations from the reduction tree of a closed term.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .derivation import (Derivation, DerivationError, check_derivation, derive,
                         empty_bang, merge_derivations, partition_derivation,
                         rescale_derivation, size, tight_value_derivations, var, zero)
from .multidist import MultiDist
from .semantics import _step, approximants, OpenTermError
from .syntax import App, Choice, Lam, Let, Mode, Term, Var, check_mode, format_term, substitute, syntactic_equal
from .types import (EMPTY, NULL, InterType, TypeDist, dist_union, inter_union,
                    is_tight, rescale_dist, rescale_inter, singleton)


def _shares(d: Derivation, mode: Mode) -> list[tuple[int, Fraction, str | None]]:
    """How the node's context is built from its premises.

    One ``(premise index, factor, bound variable)`` triple per premise that
    contributes ``factor . context`` (minus the bound variable).
    """
    r = d.rule
    if r == "Lam":
        return [(0, Fraction(1), d.term.binder)]
    if r == "Choice":
        half = Fraction(1, 2)
        return [(0, half, None), (1, half, None)]
    if r == "Val":
        return [(0, Fraction(1), None)] if d.premises else []
    if r == "Bang":
        return [(i, q, None) for i, q in enumerate(d.scales)]
    if r == "App" and mode is Mode.CBV:
        return [(0, Fraction(1), None), (1, Fraction(1), None)]
    if r in ("App", "Let"):
        entries = d.premises[0].rhs.entries
        n = len(d.premises) - 1
        pos = d.assoc if d.assoc is not None else range(n)
        bound = d.term.binder if r == "Let" else None
        return [(0, Fraction(1), None)] + [(i + 1, entries[k][0], bound)
                                           for i, k in enumerate(pos)]
    return []


def _skeleton_parts(rule: str, m: Term, n: int) -> list[Term] | None:
    """Subjects of the premises of a node with subject ``m``, or None on a shape clash."""
    if rule == "Lam":
        return [m.body] if isinstance(m, Lam) else None
    if rule == "Choice":
        return [m.left, m.right] if isinstance(m, Choice) else None
    if rule == "App":
        return [m.fun] + [m.arg] * (n - 1) if isinstance(m, App) else None
    if rule == "Let":
        return [m.bound] + [m.body] * (n - 1) if isinstance(m, Let) else None
    if rule in ("Val", "Bang"):
        return [m] * n
    return None


# -- substitution ------------------------------------------------------------

def substitute_derivation(pi: Derivation, var_name: str, phi: Derivation,
                          mode: Mode | str = Mode.CBV) -> Derivation:
    """From ``G, z:C |-^w M : t`` and ``|-^v V : C`` build ``G |-^(w+v) M{V/z} : t``."""
    mode = Mode.coerce(mode)
    if not phi.term.is_closed:
        raise DerivationError("substituted value must be closed")
    want = pi.context.get(var_name)
    if phi.rhs != want:
        raise DerivationError(f"type mismatch at {var_name}: context has {want}, value has {phi.rhs}")
    return _subst(pi, var_name, phi, mode)


def _subst(pi: Derivation, z: str, phi: Derivation, mode: Mode) -> Derivation:
    if z not in pi.term.free_vars:
        return pi
    if pi.rule == "Var":
        if mode is Mode.CBV:
            return phi
        if phi.rule != "Bang" or len(phi.premises) != 1 or phi.scales[0] != 1:
            raise DerivationError(f"type mismatch at {z}: expected a single unscaled premise")
        return phi.premises[0]
    new_term = substitute(pi.term, z, phi.term)
    if pi.rule == "Zero":
        return zero(new_term, mode)
    if pi.rule == "Val" and not pi.premises:
        return derive("Val", new_term, (), mode)
    shares = _shares(pi, mode)
    needs = [EMPTY if b == z else rescale_inter(f, pi.premises[i].context.get(z))
             for i, f, b in shares]
    pieces = partition_derivation(phi, needs, mode)
    prems = list(pi.premises)
    for (i, f, b), piece in zip(shares, pieces):
        if b != z:
            prems[i] = _subst(prems[i], z, rescale_derivation(1 / f, piece, mode), mode)
    return derive(pi.rule, new_term, prems, mode, scales=pi.scales, assoc=pi.assoc)


def anti_substitute(phi: Derivation, skeleton: Term, var_name: str, value: Term,
                    mode: Mode | str = Mode.CBV) -> tuple[InterType, Derivation, Derivation]:
    """Split ``G |-^w M{V/x} : s`` into ``G, x:C |- M : s`` and ``|- V : C``."""
    mode = Mode.coerce(mode)
    if not value.is_closed:
        raise DerivationError("substituted value must be closed")
    if not syntactic_equal(substitute(skeleton, var_name, value), phi.term):
        raise DerivationError("skeleton mismatch")
    return _anti(phi, skeleton, var_name, value, mode)


def _anti(phi: Derivation, m: Term, x: str, v: Term, mode: Mode):
    if x not in m.free_vars:
        return EMPTY, phi, empty_bang(v, mode)
    if phi.rule == "Zero":
        return EMPTY, zero(m, mode), empty_bang(v, mode)
    if isinstance(m, Var):
        if mode is Mode.CBV:
            if isinstance(phi.rhs, InterType):
                return phi.rhs, var(x, phi.rhs, mode), phi
            if phi.rule == "Val":
                inner = phi.premises[0]
                return inner.rhs, derive("Val", m, [var(x, inner.rhs, mode)], mode), inner
            raise DerivationError("skeleton mismatch")
        if isinstance(phi.rhs, TypeDist):
            return (singleton(phi.rhs), var(x, phi.rhs, mode),
                    derive("Bang", v, [phi], mode, scales=[1]))
    if phi.rule == "Val" and not phi.premises:
        return EMPTY, derive("Val", m, (), mode), empty_bang(v, mode)
    parts = _skeleton_parts(phi.rule, m, len(phi.premises))
    if parts is None:
        raise DerivationError("skeleton mismatch")
    prems = list(phi.premises)
    inters, values = [], []
    for i, f, b in _shares(phi, mode):
        if b == x:
            continue
        c, d1, d2 = _anti(phi.premises[i], parts[i], x, v, mode)
        prems[i] = d1
        inters.append(rescale_inter(f, c))
        values.append(rescale_derivation(f, d2, mode))
    built = derive(phi.rule, m, prems, mode, scales=phi.scales, assoc=phi.assoc)
    return inter_union(*inters), built, merge_derivations(values, v, mode)


# -- subject reduction -------------------------------------------------------

def _reduction(t: Term, mode: Mode) -> MultiDist:
    if not t.is_closed:
        raise OpenTermError(f"open term: free variables {', '.join(sorted(t.free_vars))}")
    red = _step(t, mode)
    if red is None:
        raise DerivationError("not a redex")
    return red


def _pool(entries) -> dict[str, list[int]]:
    pool: dict[str, list[int]] = {}
    for k, (p, a) in enumerate(entries):
        pool.setdefault(f"{p} {a.canonical_key}", []).append(k)
    for bucket in pool.values():
        bucket.reverse()
    return pool


def _by_entry(d: Derivation) -> dict[int, Derivation]:
    n = len(d.premises) - 1
    pos = d.assoc if d.assoc is not None else range(n)
    return {k: d.premises[i + 1] for i, k in enumerate(pos)}


def subject_reduce(pi: Derivation, mode: Mode | str = Mode.CBV) -> list[Derivation]:
    """One derivation per branch of the step, with ``b = U q_i b_i`` and ``w = 1 + sum q_i w_i``."""
    mode = Mode.coerce(mode)
    if pi.weight is None:
        raise DerivationError("derivation has not been checked")
    if pi.weight == 0:
        raise DerivationError("weight is zero")
    red = _reduction(pi.term, mode)
    outs = _reduce(pi, red, mode)
    qs = [q for q, _ in red.entries]
    if dist_union(*(rescale_dist(q, d.rhs) for q, d in zip(qs, outs))) != pi.rhs:
        raise DerivationError("subject reduction broke the type equation")
    if 1 + sum((q * d.weight for q, d in zip(qs, outs)), Fraction(0)) != pi.weight:
        raise DerivationError("subject reduction broke the weight equation")
    bound = size(pi)
    for d, (_, t) in zip(outs, red.entries):
        if not syntactic_equal(d.term, t):
            raise DerivationError("subject reduction produced the wrong subject")
        if size(d) >= bound:
            raise DerivationError("subject reduction did not decrease the size")
        check_derivation(d, mode)
    return outs


def _reduce(pi: Derivation, red: MultiDist, mode: Mode) -> list[Derivation]:
    t = pi.term
    if pi.rule == "Zero":
        raise DerivationError("weight is zero")
    if isinstance(t, Choice):
        return list(pi.premises)
    if isinstance(t, App) and isinstance(t.fun, Lam):
        fun, arg = pi.premises[0], pi.premises[1] if len(pi.premises) > 1 else None
        lam = fun.premises[0] if mode is Mode.CBV else fun
        if lam.rule != "Lam" or arg is None:
            raise DerivationError("function premise is not an abstraction")
        return [substitute_derivation(lam.premises[0], t.fun.binder, arg, mode)]
    if isinstance(t, Let) and t.bound.is_value:
        n = pi.premises[0]
        if n.rule == "Zero":
            return [zero(substitute(t.body, t.binder, t.bound), mode)]
        return [substitute_derivation(pi.premises[1], t.binder, n.premises[0], mode)]
    if isinstance(t, Let) or isinstance(t, App):
        inner_term = t.bound if isinstance(t, Let) else t.fun
        head = pi.premises[0]
        inner = _step(inner_term, mode)
        rebuild = ((lambda s: Let(t.binder, s, t.body)) if isinstance(t, Let)
                   else (lambda s: App(s, t.arg)))
        if head.rule == "Zero":
            if isinstance(t, App):
                raise DerivationError("weight is zero")
            return [zero(rebuild(s), mode) for _, s in inner.entries]
        subs = _reduce(head, inner, mode)
        pool = _pool(head.rhs.entries)
        attached = _by_entry(pi)
        outs = []
        for (r, _), sub in zip(inner.entries, subs):
            rest = []
            for p, a in sub.rhs.entries:
                bucket = pool.get(f"{r * p} {a.canonical_key}")
                if not bucket:
                    raise DerivationError("reduced premise type does not split the original")
                rest.append(attached[bucket.pop()])
            outs.append(derive(pi.rule, rebuild(sub.term), [sub] + rest, mode))
        return outs
    raise DerivationError("not a redex")


# -- subject expansion -------------------------------------------------------

@dataclass(frozen=True)
class ExpansionResult:
    derivation: Derivation
    bound: Fraction
    exact: bool

    @property
    def weight(self) -> Fraction:
        return self.derivation.weight

    @property
    def holds(self) -> bool:
        return self.derivation.weight >= self.bound


def subject_expand(pis: Sequence[Derivation], term: Term,
                   mode: Mode | str = Mode.CBV) -> ExpansionResult:
    """A derivation of ``term`` typed ``U q_i a_i`` with weight at least ``1 + sum q_i w_i``."""
    mode = Mode.coerce(mode)
    red = _reduction(term, mode)
    if len(pis) != len(red):
        raise DerivationError("branch/derivation count mismatch")
    for d, (_, s) in zip(pis, red.entries):
        if not syntactic_equal(d.term, s):
            raise DerivationError(f"branch subject mismatch: {format_term(d.term)}")
    d, exact = _expand(list(pis), term, red, mode)
    qs = [q for q, _ in red.entries]
    bound = 1 + sum((q * p.weight for q, p in zip(qs, pis)), Fraction(0))
    if d.rhs != dist_union(*(rescale_dist(q, p.rhs) for q, p in zip(qs, pis))):
        raise DerivationError("subject expansion broke the type equation")
    if d.weight < bound or (exact and d.weight != bound):
        raise DerivationError("subject expansion broke the weight inequality")
    check_derivation(d, mode)
    return ExpansionResult(d, bound, exact)


def _expand(pis: list[Derivation], t: Term, red: MultiDist, mode: Mode) -> tuple[Derivation, bool]:
    if isinstance(t, Choice):
        return derive("Choice", t, pis, mode), True
    if isinstance(t, App) and isinstance(t.fun, Lam):
        lam = t.fun
        _, body, arg = _anti(pis[0], lam.body, lam.binder, t.arg, mode)
        fun = derive("Lam", lam, [body], mode)
        if mode is Mode.CBV:
            fun = derive("Bang", lam, [fun], mode, scales=[1])
        return derive("App", t, [fun, arg], mode), True
    if isinstance(t, Let) and t.bound.is_value:
        _, body, arg = _anti(pis[0], t.body, t.binder, t.bound, mode)
        return derive("Let", t, [derive("Val", t.bound, [arg], mode), body], mode), True
    if isinstance(t, (Let, App)):
        inner_term = t.bound if isinstance(t, Let) else t.fun
        inner = _step(inner_term, mode)
        if isinstance(t, Let) and all(p.rule == "Zero" for p in pis):
            return derive("Let", t, [zero(inner_term, mode)], mode), True
        exact = True
        wrapped = []
        for p, (_, s) in zip(pis, inner.entries):
            if p.rule == "Zero":
                # a null-typed branch becomes the derived rule over a null-typed premise;
                # for let this costs one extra unit of weight
                p = derive(p.term.__class__.__name__, p.term, [zero(s, mode)], mode)
                exact = exact and isinstance(t, App)
            wrapped.append(p)
        head, ex = _expand([p.premises[0] for p in wrapped], inner_term, inner, mode)
        pool = _pool(head.rhs.entries)
        attached: dict[int, Derivation] = {}
        for (r, _), p in zip(inner.entries, wrapped):
            entries = p.premises[0].rhs.entries
            for k, d in _by_entry(p).items():
                q, a = entries[k]
                bucket = pool.get(f"{r * q} {a.canonical_key}")
                if not bucket:
                    raise DerivationError("incompatible branch types for shared subterm")
                attached[bucket.pop()] = d
        rest = [attached[k] for k in range(len(head.rhs.entries))]
        return derive(t.__class__.__name__, t, [head] + rest, mode), exact and ex
    raise DerivationError("not a redex")


# -- completeness ------------------------------------------------------------

def _prepare(t: Term, k: int, mode: Mode) -> None:
    if k < 0:
        raise ValueError("k must be non-negative")
    if not t.is_closed:
        raise OpenTermError(f"open term: free variables {', '.join(sorted(t.free_vars))}")
    check_mode(t, mode)


def _complete(t: Term, k: int, mode: Mode, null: bool, memo: dict) -> Derivation:
    key = (format_term(t), k, mode, null)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if t.is_value:
        d = zero(t, mode) if null else tight_value_derivations(t, mode)[0]
    elif k == 0:
        d = zero(t, mode)
    else:
        red = _step(t, mode)
        subs = [_complete(s, k - 1, mode, null, memo) for _, s in red.entries]
        d, _ = _expand(subs, t, red, mode)
    memo[key] = d
    return d


def tight_complete(t: Term, k: int, mode: Mode | str = Mode.CBV,
                   memo: dict | None = None) -> Derivation:
    """A tight derivation of ``t`` with norm ``P^k(t)`` and weight at least ``eT^k(t)``."""
    mode = Mode.coerce(mode)
    _prepare(t, k, mode)
    d = _complete(t, k, mode, False, {} if memo is None else memo)
    ps, ets = approximants(t, k, mode)
    if not is_tight(d.rhs, mode):
        raise DerivationError("synthesized derivation is not tight")
    if d.rhs.norm != ps[k]:
        raise DerivationError(f"synthesized norm {d.rhs.norm} differs from P^{k} = {ps[k]}")
    if d.weight < ets[k]:
        raise DerivationError(f"synthesized weight {d.weight} below eT^{k} = {ets[k]}")
    check_derivation(d, mode)
    return d


def null_complete(t: Term, k: int, mode: Mode | str = Mode.CBV,
                  memo: dict | None = None) -> Derivation:
    """A derivation of ``t : <>`` with weight at least ``eT^k(t)``."""
    mode = Mode.coerce(mode)
    _prepare(t, k, mode)
    d = _complete(t, k, mode, True, {} if memo is None else memo)
    _, ets = approximants(t, k, mode)
    if d.rhs != NULL:
        raise DerivationError("synthesized derivation is not null")
    if d.weight < ets[k]:
        raise DerivationError(f"synthesized weight {d.weight} below eT^{k} = {ets[k]}")
    check_derivation(d, mode)
    return d
