"""Command-line front end.

Exit status is 0 on success, 1 when the input is rejected (bad term, failed
check, unknown name...) and 2 on command-line usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import stdlib
from .derivation import deserialize, serialize, size, validated
from .multidist import MultiDist
from .semantics import approximants, default_limit, evaluate
from .sexp import quote
from .syntax import Mode, format_term, parse
from .transform import null_complete, subject_reduce, tight_complete
from .types import TypeDist, is_tight


class CliError(Exception):
    pass


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def resolve_term(arg: str, mode: Mode, desugar: bool):
    """A file path if one exists, otherwise a stdlib name."""
    if arg == "-" or os.path.isfile(arg):
        return parse(_read_text(arg), mode, desugar=desugar)
    try:
        return stdlib.lookup(arg).term(mode)
    except KeyError:
        raise CliError(f"no such file or stdlib term: {arg}") from None


def _decimal(q: Fraction, digits: int) -> str:
    return f"{float(q):.{digits}f}"


def _dist_text(m: MultiDist, fmt: str) -> str:
    if fmt == "sexp":
        return "(dist" + "".join(f" ({p} {quote(format_term(t))})" for p, t in m.entries) + ")"
    return str(m)


def cmd_eval(args, out) -> None:
    t = resolve_term(args.term, args.mode, args.desugar)
    limit = args.limit if args.limit is not None else default_limit()
    trace = evaluate(t, args.steps, args.mode, limit=limit)
    for m in trace.states:
        print(_dist_text(m, args.format), file=out)


def cmd_approx(args, out) -> None:
    t = resolve_term(args.term, args.mode, args.desugar)
    ps, ets = approximants(t, args.steps, args.mode)
    k, p, e = args.steps, ps[-1], ets[-1]
    if args.format == "sexp":
        line = f"(approx (steps {k}) (P {p}) (eT {e}))"
    else:
        line = f"P^{k}={p} eT^{k}={e}"
    if args.decimal is not None:
        line += f" ; P~{_decimal(p, args.decimal)} eT~{_decimal(e, args.decimal)}"
    print(line, file=out)


def _report(d, mode: Mode, fmt: str, digits: int | None) -> str:
    rhs = d.rhs
    dist = isinstance(rhs, TypeDist)
    tight = "true" if dist and is_tight(rhs, mode) else "false"
    norm = str(rhs.norm) if dist else "n/a"
    if fmt == "sexp":
        line = f"(report (weight {d.weight}) (type {rhs}) (tight {tight}) (norm {norm}) (size {size(d)}))"
    else:
        line = f"weight={d.weight} type={rhs} tight={tight} norm={norm}"
    if digits is not None:
        line += f" ; weight~{_decimal(d.weight, digits)}"
        if dist:
            line += f" norm~{_decimal(rhs.norm, digits)}"
    return line


def cmd_check(args, out) -> None:
    d = validated(deserialize(_read_text(args.file), args.mode), args.mode)
    print(_report(d, args.mode, args.format, args.decimal), file=out)


def cmd_synthesize(args, out) -> None:
    t = resolve_term(args.term, args.mode, args.desugar)
    build = null_complete if args.null else tight_complete
    d = build(t, args.steps, args.mode)
    if args.format == "text":
        print("; " + _report(d, args.mode, "text", args.decimal), file=out)
    out.write(serialize(d))


def cmd_reduce(args, out) -> None:
    d = validated(deserialize(_read_text(args.file), args.mode), args.mode)
    from .semantics import step
    red = step(d.term, args.mode)
    if red is None:
        raise CliError("the subject is a value")
    branches = subject_reduce(d, args.mode)
    for i, ((q, t), b) in enumerate(zip(red.entries, branches)):
        print(f"; branch {i}: probability {q}, {_report(b, args.mode, 'text', args.decimal)}",
              file=out)
        out.write(serialize(b))


def cmd_stdlib(args, out) -> None:
    if args.action == "list":
        for e in stdlib.entries():
            print(f"{e.name}\t{e.mode_label}\t{e.notes}", file=out)
        return
    if not args.name:
        raise CliError("stdlib show needs a name")
    try:
        e = stdlib.lookup(args.name)
        t = e.term(args.mode)
    except KeyError as exc:
        raise CliError(exc.args[0]) from None
    print(quote(format_term(t)) if args.format == "sexp" else format_term(t), file=out)


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--mode", type=Mode.coerce, choices=list(Mode), default=Mode.CBV,
                        metavar="{cbv,cbn}", help="calculus (default cbv)")
    shared.add_argument("--desugar", action="store_true",
                        help="accept non-value applications in cbv input by let-binding them")
    shared.add_argument("--limit", type=int, default=None,
                        help="cap on multidistribution entries (default $PTYTERM_LIMIT)")
    shared.add_argument("--format", choices=("text", "sexp"), default="text")
    shared.add_argument("--decimal", type=int, default=None, metavar="D",
                        help="also show rounded values with D digits")

    p = argparse.ArgumentParser(prog="ptyterm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[shared], help="print the reduction sequence")
    e.add_argument("term")
    e.add_argument("--steps", type=int, required=True)
    e.set_defaults(run=cmd_eval)

    a = sub.add_parser("approx", parents=[shared], help="print P^k and eT^k")
    a.add_argument("term")
    a.add_argument("--steps", type=int, required=True)
    a.set_defaults(run=cmd_approx)

    c = sub.add_parser("check", parents=[shared], help="check a derivation file ('-' for stdin)")
    c.add_argument("file")
    c.set_defaults(run=cmd_check)

    s = sub.add_parser("synthesize", parents=[shared], help="build a tight (or null) derivation")
    s.add_argument("term")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--null", action="store_true")
    s.set_defaults(run=cmd_synthesize)

    r = sub.add_parser("reduce-deriv", parents=[shared],
                       help="subject-reduce a derivation along one step")
    r.add_argument("file")
    r.set_defaults(run=cmd_reduce)

    lib = sub.add_parser("stdlib", parents=[shared], help="list or show named terms")
    lib.add_argument("action", choices=("list", "show"))
    lib.add_argument("name", nargs="?")
    lib.set_defaults(run=cmd_stdlib)
    return p


def main(argv: list[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "steps", 0) is not None and getattr(args, "steps", 0) < 0:
        parser.error("--steps must be non-negative")
    try:
        args.run(args, out)
    except (CliError, ValueError, OSError, RecursionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
