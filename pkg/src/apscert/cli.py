"""Command line interface: ``apscert <command> FILE ...``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import certificate
from .complement import ComplementError
from .core import Atom, Proof, check_proof
from .counterproof import UnfoldContext, UnfoldError, unfold
from .decide import DecisionError, Verdict
from .saturation import SaturationError, lift_proof
from .syntax import ParseError, format_system, parse_atom, parse_system


class CliError(Exception):
    pass


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from None
    try:
        return parse_system(text)
    except ParseError as e:
        raise CliError(f"{path}:{e}") from None


def _atom(text: str, ctx: UnfoldContext) -> Atom:
    try:
        a = parse_atom(text)
    except ParseError as e:
        raise CliError(f"bad atom {text!r}: {e}") from None
    if not ctx.base.signature.admits(a):
        raise CliError(f"atom {a} uses a predicate or symbol that does not occur in the rule file")
    return a


def candidate_systems(ctx: UnfoldContext) -> dict:
    """Every system a certificate for this rule file may refer to, by hash."""
    systems = [
        (ctx.base, False),
        (ctx.automaton, False),
        (ctx.a_b, False),
        (ctx.i_j, True),
    ]
    return {certificate.system_hash(s): (s, prefix_ok) for s, prefix_ok in systems}


def _emit(pf: Proof, system, fmt: str, loops=()) -> str:
    if fmt == "json":
        return certificate.dumps(pf, system)
    if fmt == "dot":
        return certificate.format_dot(pf)
    return certificate.format_tree(pf, loops)


def cmd_check(args) -> int:
    s = _load(args.file)
    preds = len(s.signature.predicates)
    syms = len(s.signature.symbols)
    print(f"ok: {len(s)} rules, {preds} predicates, {syms} stack symbols")
    return 0


def cmd_saturate(args) -> int:
    ctx = UnfoldContext.from_system(_load(args.file))
    sys.stdout.write(format_system(ctx.saturated.rules, comments=True))
    return 0


def cmd_automaton(args) -> int:
    ctx = UnfoldContext.from_system(_load(args.file))
    sys.stdout.write(format_system(ctx.automaton, comments=args.comments))
    return 0


def cmd_complement(args) -> int:
    ctx = UnfoldContext.from_system(_load(args.file))
    signed = ctx.a_b if args.of == "automaton" else ctx.i_j
    sys.stdout.write(format_system(signed.negative, comments=args.comments))
    return 0


def cmd_decide(args) -> int:
    ctx = UnfoldContext.from_system(_load(args.file))
    verdict = ctx.session.decide(_atom(args.atom, ctx))
    print(verdict.value)
    return 0 if verdict is Verdict.PROVABLE else 1


def cmd_certify(args) -> int:
    ctx = UnfoldContext.from_system(_load(args.file))
    a = _atom(args.atom, ctx)
    if ctx.session.decide(a) is Verdict.PROVABLE:
        pf = ctx.session.prove(a)
        system = ctx.automaton
        if args.lift:
            pf = lift_proof(ctx.saturated, pf)
            system = ctx.base
    else:
        pf = ctx.session.refute(a)
        system = ctx.a_b
    report = check_proof(system, pf)
    if not report:
        raise CliError(f"internal error: produced certificate fails its own check: {report.reason}")
    sys.stdout.write(_emit(pf, system, args.format))
    return 0


def cmd_unfold(args) -> int:
    ctx = UnfoldContext.from_system(_load(args.file))
    a = _atom(args.atom, ctx)
    if ctx.session.decide(a) is Verdict.PROVABLE:
        raise CliError(f"{a} is provable; only refutable atoms have counter-proofs")
    prefix = unfold(ctx, a, args.depth, naive=args.naive)
    sys.stdout.write(_emit(prefix.proof, ctx.i_j, args.format, prefix.loops))
    return 0


def cmd_verify(args) -> int:
    ctx = UnfoldContext.from_system(_load(args.file))
    try:
        with open(args.cert, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise CliError(f"cannot read {args.cert}: {e.strerror}") from None
    try:
        report = certificate.verify_document(text, candidate_systems(ctx))
    except json.JSONDecodeError as e:
        raise CliError(f"{args.cert}: not JSON: {e}") from None
    if report:
        print("valid")
        return 0
    where = "/".join(map(str, report.path)) if report.path is not None else "-"
    print(f"invalid at node {where}: {report.reason}")
    return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="apscert",
        description="Decide, certify and explain (non-)provability in alternating pushdown systems.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a rule file")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("saturate", help="print the saturated system with provenance")
    p.add_argument("file")
    p.set_defaults(func=cmd_saturate)

    p = sub.add_parser("automaton", help="print the equivalent automaton")
    p.add_argument("file")
    p.add_argument("--comments", action="store_true")
    p.set_defaults(func=cmd_automaton)

    p = sub.add_parser("complement", help="print the complement of the automaton or the original")
    p.add_argument("file")
    p.add_argument("--of", choices=("automaton", "original"), default="automaton")
    p.add_argument("--comments", action="store_true")
    p.set_defaults(func=cmd_complement)

    p = sub.add_parser("decide", help="exit 0 if the atom is provable, 1 if refutable")
    p.add_argument("file")
    p.add_argument("atom")
    p.set_defaults(func=cmd_decide)

    formats = ("json", "tree", "dot")
    p = sub.add_parser("certify", help="emit a proof or a refutation certificate")
    p.add_argument("file")
    p.add_argument("atom")
    p.add_argument("--format", choices=formats, default="json")
    p.add_argument("--lift", action="store_true", help="replay proofs in the original system")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("unfold", help="depth-bounded counter-proof in the complemented original system")
    p.add_argument("file")
    p.add_argument("atom")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--naive", action="store_true", help="select premises with the decision procedure")
    p.add_argument("--format", choices=formats, default="json")
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("verify", help="re-check a JSON certificate against a rule file")
    p.add_argument("file")
    p.add_argument("cert")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "depth", 0) is not None and getattr(args, "depth", 0) < 0:
        print("apscert: error: --depth must be non-negative", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (CliError, DecisionError, SaturationError, ComplementError, UnfoldError) as e:
        print(f"apscert: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
