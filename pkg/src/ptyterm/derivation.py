"""Type derivations: construction, rule-by-rule checking, weight and size,
value-level helpers (scaling, partitioning) and the s-expression file format.

Rule names are ``Var``, ``Zero``, ``App``, ``Choice``, ``Lam``, ``Let``,
``Val`` and ``Bang``.  ``Let`` exists only in call-by-value.  In call-by-name
``Val`` is the axiom typing an abstraction with ``<1 *>``.

``Bang`` nodes carry their scale factors.  ``Let`` nodes (and call-by-name
``App`` nodes) carry an association list: premise ``i`` after the first one
is paired with entry ``assoc[i]`` of the first premise's type distribution,
in canonical order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .multidist import DomainError, MassOverflow, check_scalar
from .sexp import ReadError, Tokens, quote
from .syntax import (App, Choice, Lam, Let, Mode, SyntaxError_, Term, Var,
                     format_term, parse, syntactic_equal)
from .types import (EMPTY_CTX, NULL, STAR, Arrow, Context, InterType,
                    TypeDist, TypeSyntaxError, check_type_mode, ctx_union,
                    dirac, dist_union, format_type, read_type, rescale_ctx,
                    rescale_dist, singleton)

RULES = ("Var", "Zero", "App", "Choice", "Lam", "Let", "Val", "Bang")
SYMBOL = {"Var": "Var", "Zero": "Zero", "App": "@", "Choice": "⊕",
          "Lam": "λ", "Let": "let", "Val": "Val", "Bang": "!"}
HALF = Fraction(1, 2)


class DerivationError(ValueError):
    """A derivation fails to check; ``path`` lists premise indices from the root."""

    def __init__(self, message: str, path: tuple[int, ...] = ()):
        self.detail = message
        self.path = path
        where = "root" if not path else "premise path " + ".".join(map(str, path))
        super().__init__(f"{message} (at {where})")


@dataclass(frozen=True)
class Judgment:
    context: Context
    weight: Fraction | None
    term: Term
    rhs: object

    def __str__(self) -> str:
        ctx = ", ".join(f"{x}: {a}" for x, a in self.context.items())
        w = "?" if self.weight is None else str(self.weight)
        return f"{ctx} |-^{w} {format_term(self.term)} : {self.rhs}"


@dataclass(frozen=True, eq=False)
class Derivation:
    rule: str
    conclusion: Judgment
    premises: tuple["Derivation", ...] = ()
    scales: tuple[Fraction, ...] | None = None
    assoc: tuple[int, ...] | None = None

    @property
    def term(self) -> Term:
        return self.conclusion.term

    @property
    def weight(self) -> Fraction:
        return self.conclusion.weight

    @property
    def rhs(self):
        return self.conclusion.rhs

    @property
    def context(self) -> Context:
        return self.conclusion.context


# -- the rules ---------------------------------------------------------------

class _RuleError(Exception):
    pass


def _same(a: Term, b: Term) -> bool:
    return a is b or syntactic_equal(a, b)


def _positions(assoc: Sequence[int] | None, n: int, sym: str) -> tuple[int, ...]:
    if assoc is None:
        return tuple(range(n))
    assoc = tuple(assoc)
    if sorted(assoc) != list(range(n)):
        raise _RuleError(f"association {list(assoc)} is not a permutation of the {n} entries"
                         f" at rule {sym}")
    return assoc


def _conclude(rule: str, term: Term, prems: Sequence[Judgment], mode: Mode,
              scales, assoc, hint) -> tuple[Context, Fraction, object]:
    """Context, weight and type the rule concludes from the premise judgments."""
    if rule not in SYMBOL:
        raise _RuleError(f"unknown rule {rule!r}")
    sym = SYMBOL[rule]
    cbv = mode is Mode.CBV

    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise _RuleError(f"{msg} at rule {sym}")

    def arity(n: int) -> None:
        need(len(prems) == n, f"expected {n} premise(s), found {len(prems)}")

    need(scales is None or rule == "Bang", "scale factors are only allowed")
    need(assoc is None or rule == "Let" or (rule == "App" and not cbv),
         "an association list is not allowed")

    if rule == "Var":
        arity(0)
        need(isinstance(term, Var), "subject is not a variable")
        need(hint is not None, "missing type")
        try:
            check_type_mode(hint, mode)
        except TypeSyntaxError as exc:
            raise _RuleError(f"{exc} at rule {sym}") from None
        if cbv:
            need(isinstance(hint, InterType), "variable type is not an intersection")
            return Context({term.name: hint}), Fraction(0), hint
        need(isinstance(hint, TypeDist), "variable type is not a type distribution")
        return Context({term.name: singleton(hint)}), Fraction(0), hint

    if rule == "Zero":
        arity(0)
        return EMPTY_CTX, Fraction(0), NULL

    if rule == "Val":
        if not cbv:
            arity(0)
            need(isinstance(term, Lam), "subject is not an abstraction")
            return EMPTY_CTX, Fraction(0), dirac(STAR)
        arity(1)
        (p,) = prems
        need(term.is_value, "subject is not a value")
        need(_same(p.term, term), "premise subject differs")
        need(isinstance(p.rhs, InterType), "premise type is not an intersection")
        return p.context, p.weight, dirac(p.rhs)

    if rule == "Lam":
        arity(1)
        (p,) = prems
        need(isinstance(term, Lam), "subject is not an abstraction")
        need(_same(p.term, term.body), "premise subject is not the body")
        need(isinstance(p.rhs, TypeDist), "body type is not a type distribution")
        arrow = Arrow(p.context.get(term.binder), p.rhs)
        rhs = arrow if cbv else dirac(arrow)
        return p.context.without(term.binder), p.weight + 1, rhs

    if rule == "Choice":
        arity(2)
        need(isinstance(term, Choice), "subject is not a choice")
        l, r = prems
        need(_same(l.term, term.left) and _same(r.term, term.right), "premise subjects differ")
        need(isinstance(l.rhs, TypeDist) and isinstance(r.rhs, TypeDist),
             "premise types are not type distributions")
        ctx = ctx_union(rescale_ctx(HALF, l.context), rescale_ctx(HALF, r.context))
        rhs = dist_union(rescale_dist(HALF, l.rhs), rescale_dist(HALF, r.rhs))
        return ctx, HALF * l.weight + HALF * r.weight + 1, rhs

    if rule == "Bang":
        need(scales is not None, "missing scale factors")
        need(len(scales) == len(prems), "scale factor count differs from premise count")
        try:
            for q in scales:
                check_scalar(q)
        except DomainError as exc:
            raise _RuleError(f"{exc} at rule {sym}") from None
        if cbv:
            need(term.is_value, "subject is not a value")
        want = Arrow if cbv else TypeDist
        for p in prems:
            need(_same(p.term, term), "premise subject differs")
            need(isinstance(p.rhs, want), "premise type has the wrong sort")
        ctx = ctx_union(*(rescale_ctx(q, p.context) for q, p in zip(scales, prems)))
        weight = sum((q * p.weight for q, p in zip(scales, prems)), Fraction(0))
        return ctx, weight, InterType(tuple((q, p.rhs) for q, p in zip(scales, prems)))

    if rule == "App" and cbv:
        arity(2)
        need(isinstance(term, App), "subject is not an application")
        need(term.fun.is_value and term.arg.is_value, "application of non-values")
        f, a = prems
        need(_same(f.term, term.fun) and _same(a.term, term.arg), "premise subjects differ")
        need(isinstance(f.rhs, InterType) and len(f.rhs) == 1 and f.rhs.entries[0][0] == 1
             and isinstance(f.rhs.entries[0][1], Arrow),
             "function type is not a single unscaled arrow")
        arrow = f.rhs.entries[0][1]
        need(a.rhs == arrow.domain,
             f"argument type mismatch: expected {arrow.domain}, found {a.rhs}")
        return ctx_union(f.context, a.context), f.weight + a.weight, arrow.codomain

    if rule == "App":
        need(isinstance(term, App), "subject is not an application")
        need(len(prems) >= 1, "missing function premise")
        f, args = prems[0], prems[1:]
        need(_same(f.term, term.fun), "function premise subject differs")
        need(isinstance(f.rhs, TypeDist), "function type is not a type distribution")
        entries = f.rhs.entries
        need(all(isinstance(a, Arrow) for _, a in entries), "function type contains *")
        need(len(args) == len(entries),
             f"expected {len(entries)} argument premise(s), found {len(args)}")
        pos = _positions(assoc, len(args), sym)
        ctxs, weight, outs = [f.context], f.weight, []
        for a, k in zip(args, pos):
            pk, arrow = entries[k]
            need(_same(a.term, term.arg), "argument premise subject differs")
            need(isinstance(a.rhs, InterType) and a.rhs == arrow.domain,
                 f"argument type mismatch: expected {arrow.domain}, found {a.rhs}")
            ctxs.append(rescale_ctx(pk, a.context))
            weight += pk * a.weight
            outs.append(rescale_dist(pk, arrow.codomain))
        return ctx_union(*ctxs), weight, dist_union(*outs)

    if rule == "Let":
        need(cbv, "let is not part of the CbN system")
        need(isinstance(term, Let), "subject is not a let")
        need(len(prems) >= 1, "missing premise for the bound term")
        n, branches = prems[0], prems[1:]
        need(_same(n.term, term.bound), "bound-term premise subject differs")
        need(isinstance(n.rhs, TypeDist), "bound-term type is not a type distribution")
        entries = n.rhs.entries
        need(len(branches) == len(entries),
             f"expected {len(entries)} branch premise(s), found {len(branches)}")
        pos = _positions(assoc, len(branches), sym)
        ctxs, weight, outs = [n.context], n.weight + 1, []
        for b, k in zip(branches, pos):
            pk, inter = entries[k]
            need(_same(b.term, term.body), "branch premise subject is not the body")
            need(isinstance(b.rhs, TypeDist), "branch type is not a type distribution")
            got = b.context.get(term.binder)
            need(got == inter, f"bound variable typed {got}, expected {inter}")
            ctxs.append(rescale_ctx(pk, b.context.without(term.binder)))
            weight += pk * b.weight
            outs.append(rescale_dist(pk, b.rhs))
        return ctx_union(*ctxs), weight, dist_union(*outs)

    raise _RuleError(f"rule {rule} does not apply")


def derive(rule: str, term: Term, premises: Iterable[Derivation] = (),
           mode: Mode | str = Mode.CBV, *, scales=None, assoc=None, rhs=None) -> Derivation:
    """Build one node on top of already-built premises, checking the rule locally."""
    mode = Mode.coerce(mode)
    premises = tuple(premises)
    if scales is not None:
        scales = tuple(Fraction(q) for q in scales)
    if assoc is not None:
        assoc = tuple(assoc)
    try:
        ctx, weight, out = _conclude(rule, term, [p.conclusion for p in premises],
                                     mode, scales, assoc, rhs)
    except (_RuleError, MassOverflow, DomainError) as exc:
        raise DerivationError(str(exc)) from None
    return Derivation(rule, Judgment(ctx, weight, term, out), premises, scales, assoc)


def var(name: str, rhs, mode: Mode | str = Mode.CBV) -> Derivation:
    return derive("Var", Var(name), (), mode, rhs=rhs)


def zero(term: Term, mode: Mode | str = Mode.CBV) -> Derivation:
    return derive("Zero", term, (), mode)


def empty_bang(term: Term, mode: Mode | str = Mode.CBV) -> Derivation:
    return derive("Bang", term, (), mode, scales=())


# -- checking ----------------------------------------------------------------

def _rebuild(d: Derivation, mode: Mode, path: tuple[int, ...], memo: dict) -> Derivation:
    hit = memo.get(id(d))
    if hit is not None:
        return hit[1]
    if not isinstance(d, Derivation):
        raise DerivationError(f"not a derivation: {d!r}", path)
    prems = tuple(_rebuild(p, mode, path + (i,), memo) for i, p in enumerate(d.premises))
    stored = d.conclusion
    try:
        ctx, weight, out = _conclude(d.rule, stored.term, [p.conclusion for p in prems],
                                     mode, d.scales, d.assoc, stored.rhs)
    except (_RuleError, MassOverflow, DomainError) as exc:
        raise DerivationError(str(exc), path) from None
    sym = SYMBOL[d.rule]
    if stored.weight is not None and stored.weight != weight:
        raise DerivationError(
            f"weight mismatch at rule {sym}: expected {weight}, found {stored.weight}", path)
    if stored.context != ctx:
        raise DerivationError(
            f"context mismatch at rule {sym}: expected {ctx.canonical_key},"
            f" found {stored.context.canonical_key}", path)
    if stored.rhs != out:
        raise DerivationError(f"type mismatch at rule {sym}: expected {out}, found {stored.rhs}",
                              path)
    if not ctx.domain <= stored.term.free_vars:
        raise DerivationError(f"context mentions variables not free in the subject at rule {sym}",
                              path)
    fresh = Derivation(d.rule, Judgment(ctx, weight, stored.term, out), prems, d.scales, d.assoc)
    memo[id(d)] = (d, fresh)
    return fresh


def validated(d: Derivation, mode: Mode | str = Mode.CBV) -> Derivation:
    """Check ``d`` and return a copy whose every weight is filled in."""
    return _rebuild(d, Mode.coerce(mode), (), {})


def check_derivation(d: Derivation, mode: Mode | str = Mode.CBV) -> Judgment:
    """Re-derive the conclusion of ``d`` bottom-up, verifying every node."""
    return validated(d, mode).conclusion


def weight(d: Derivation, mode: Mode | str = Mode.CBV) -> Fraction:
    return check_derivation(d, mode).weight


def size(d: Derivation) -> int:
    """Number of rule instances, not counting ``Bang`` and ``Val``."""
    memo: dict[int, int] = {}

    def go(n: Derivation) -> int:
        hit = memo.get(id(n))
        if hit is None:
            hit = (n.rule not in ("Bang", "Val")) + sum(go(p) for p in n.premises)
            memo[id(n)] = hit
        return hit

    return go(d)


def is_tight_derivation(d: Derivation, mode: Mode | str = Mode.CBV) -> bool:
    from .types import is_tight
    return isinstance(d.rhs, TypeDist) and is_tight(d.rhs, mode)


# -- value-level helpers -----------------------------------------------------

def tight_value_derivations(v: Term, mode: Mode | str = Mode.CBV) -> tuple[Derivation, Derivation]:
    """The two weight-0 tight derivations of a closed value."""
    mode = Mode.coerce(mode)
    ok = v.is_closed and (isinstance(v, Lam) if mode is Mode.CBN else v.is_value)
    if not ok:
        raise DerivationError(f"not a closed value: {format_term(v)}")
    if mode is Mode.CBV:
        top = derive("Val", v, [empty_bang(v, mode)], mode)
    else:
        top = derive("Val", v, (), mode)
    return top, zero(v, mode)


def _require_bang(d: Derivation) -> None:
    if d.rule != "Bang":
        raise DerivationError("not a Bang-rooted value derivation")


def rescale_derivation(f: Fraction, d: Derivation, mode: Mode | str = Mode.CBV) -> Derivation:
    """Multiply the scale factors of a Bang node by any positive ``f``."""
    _require_bang(d)
    if f == 1:
        return d
    return derive("Bang", d.term, d.premises, mode, scales=[f * q for q in d.scales])


def scale_derivation(q, d: Derivation, mode: Mode | str = Mode.CBV) -> Derivation:
    """``|-^v V : mA`` to ``|-^(qv) V : q.mA`` for ``q`` in (0,1]."""
    return rescale_derivation(check_scalar(q), d, mode)


def partition_derivation(d: Derivation, split: Sequence[InterType],
                         mode: Mode | str = Mode.CBV) -> list[Derivation]:
    """Split a Bang node along a partition of its intersection type."""
    _require_bang(d)
    pool: dict[str, list[int]] = {}
    for i, (q, p) in enumerate(zip(d.scales, d.premises)):
        pool.setdefault(f"{q} {p.rhs.canonical_key}", []).append(i)
    parts = []
    for part in split:
        idx = []
        for q, a in part.entries:
            bucket = pool.get(f"{q} {a.canonical_key}")
            if not bucket:
                raise DerivationError("split does not partition the multiset")
            idx.append(bucket.pop())
        parts.append(derive("Bang", d.term, [d.premises[i] for i in idx], mode,
                            scales=[d.scales[i] for i in idx]))
    if any(pool.values()):
        raise DerivationError("split does not partition the multiset")
    return parts


def merge_derivations(ds: Sequence[Derivation], term: Term | None = None,
                      mode: Mode | str = Mode.CBV) -> Derivation:
    """Inverse of ``partition_derivation``: one Bang node with all premises."""
    if not ds:
        if term is None:
            raise DerivationError("nothing to merge")
        return empty_bang(term, mode)
    for d in ds:
        _require_bang(d)
    prems = tuple(p for d in ds for p in d.premises)
    scales = tuple(q for d in ds for q in d.scales)
    return derive("Bang", ds[0].term, prems, mode, scales=scales)


# -- file format -------------------------------------------------------------

def serialize(d: Derivation, with_weights: bool = True) -> str:
    lines: list[str] = []

    def emit(n: Derivation, depth: int) -> None:
        c = n.conclusion
        ctx = " ".join(f"({x} {format_type(a)})" for x, a in c.context.items())
        ctx = f"(ctx {ctx})" if ctx else "(ctx)"
        parts = [ctx]
        if with_weights and c.weight is not None:
            parts.append(str(c.weight))
        parts += [quote(format_term(c.term)), format_type(c.rhs)]
        head = f"(rule {n.rule} (judgment {' '.join(parts)})"
        if n.scales is not None:
            head += " (scales" + "".join(f" {q}" for q in n.scales) + ")"
        if n.assoc is not None:
            head += " (assoc" + "".join(f" {i}" for i in n.assoc) + ")"
        pad = "  " * depth
        if not n.premises:
            lines.append(pad + head + ")")
            return
        lines.append(pad + head)
        for p in n.premises:
            emit(p, depth + 1)
        lines[-1] += ")"

    emit(d, 0)
    return "\n".join(lines) + "\n"


def deserialize(text: str, mode: Mode | str = Mode.CBV) -> Derivation:
    """Read a derivation file; nothing is checked beyond syntax."""
    mode = Mode.coerce(mode)
    tokens = Tokens(text)
    d = _read_node(tokens, mode)
    tokens.done()
    return d


def _keyword(tokens: Tokens, word: str) -> None:
    tokens.expect("(")
    tokens.expect("atom", word)


def _read_type(tokens: Tokens, mode: Mode):
    pos = tokens.peek()[2]
    t = read_type(tokens)
    try:
        check_type_mode(t, mode)
    except TypeSyntaxError as exc:
        raise ReadError(str(exc), pos) from None
    return t


def _read_node(tokens: Tokens, mode: Mode) -> Derivation:
    _keyword(tokens, "rule")
    kind, rule, pos = tokens.expect("atom")
    if rule not in RULES:
        raise ReadError(f"unknown rule {rule!r}", pos)
    _keyword(tokens, "judgment")
    _keyword(tokens, "ctx")
    bindings = []
    while tokens.at("("):
        tokens.next()
        _, name, _ = tokens.expect("atom")
        a = _read_type(tokens, mode)
        if not isinstance(a, InterType):
            raise ReadError(f"context entry for {name} is not an intersection type", pos)
        bindings.append((name, a))
        tokens.expect(")")
    tokens.expect(")")
    names = [x for x, _ in bindings]
    if len(set(names)) != len(names):
        raise ReadError("repeated variable in context", pos)
    w = None
    if tokens.at("atom"):
        _, text, wpos = tokens.next()
        try:
            w = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ReadError(f"bad weight {text!r}", wpos) from None
    _, src, tpos = tokens.expect("string")
    try:
        term = parse(src, mode)
    except SyntaxError_ as exc:
        raise ReadError(f"bad term {src!r}: {exc}", tpos) from None
    rhs = _read_type(tokens, mode)
    tokens.expect(")")
    scales = assoc = None
    premises = []
    while tokens.at("("):
        head = tokens.peek(1)
        if head[0] == "atom" and head[1] == "scales":
            tokens.next(), tokens.next()
            scales = []
            while tokens.at("atom"):
                _, text, qpos = tokens.next()
                try:
                    scales.append(Fraction(text))
                except (ValueError, ZeroDivisionError):
                    raise ReadError(f"bad scale factor {text!r}", qpos) from None
            tokens.expect(")")
            scales = tuple(scales)
        elif head[0] == "atom" and head[1] == "assoc":
            tokens.next(), tokens.next()
            idx = []
            while tokens.at("atom"):
                _, text, ipos = tokens.next()
                if not text.isdigit():
                    raise ReadError(f"bad association index {text!r}", ipos)
                idx.append(int(text))
            tokens.expect(")")
            assoc = tuple(idx)
        else:
            premises.append(_read_node(tokens, mode))
    tokens.expect(")")
    return Derivation(rule, Judgment(Context(bindings), w, term, rhs), tuple(premises),
                      scales, assoc)


def load(path: str, mode: Mode | str = Mode.CBV) -> Derivation:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read(), mode)


