"""Conclusion specialisation and cross-product complements.

After hatting, every conclusion is one of ``P(eps)`` or ``P(a x)``, and
each closed atom is an instance of exactly one of them.  The complement
then derives ``B`` from one premise picked out of every positive rule
concluding ``B``.
"""

from __future__ import annotations

import itertools
import math
from typing import Optional

from .core import (
    Atom,
    Instance,
    Pattern,
    Rule,
    Selection,
    Signature,
    SignedSystem,
    Subst,
    System,
    _dedupe,
)

DEFAULT_COMPLEMENT_LIMIT = 10**6


class ComplementError(ValueError):
    pass


def conclusion_basis(sig: Signature) -> tuple[Pattern, ...]:
    out = []
    for p in sorted(sig.predicates):
        out.append(Pattern(p, (), False))
        out.extend(Pattern(p, (a,), True) for a in sorted(sig.symbols))
    return tuple(out)


def basis_pattern(a: Atom) -> Pattern:
    """The unique basis pattern matching ``a``."""
    if not a.word:
        return Pattern(a.predicate, (), False)
    return Pattern(a.predicate, a.word[:1], True)


def _in_basis(p: Pattern) -> bool:
    return (p.var and len(p.prefix) == 1) or (not p.var and p.prefix == ())


def hat(s: System) -> System:
    """Equivalent system whose conclusions all lie in the conclusion basis."""
    if "hatted" in s.flags:
        return s
    out: list[Rule] = []
    seen: set = set()

    def emit(r: Rule) -> None:
        # a specialisation may coincide with a rule already present
        if r.key not in seen:
            seen.add(r.key)
            out.append(r)

    for r in s:
        c = r.conclusion
        if _in_basis(c):
            emit(r)
            continue
        if not c.var:
            raise ComplementError(
                f"rule {r.id}: ground conclusion {c} is not of the form P(eps)"
            )
        if c.prefix:
            raise ComplementError(
                f"rule {r.id}: conclusion {c} has a prefix of length {len(c.prefix)}; "
                "only P(x), P(a x) and P(eps) can be specialised"
            )
        substs = [("eps", Subst((), False))]
        substs += [(a, Subst((a,), True)) for a in sorted(s.signature.symbols)]
        for tag, sub in substs:
            emit(
                Rule(
                    f"{r.id}@{tag}",
                    sub.apply(c),
                    tuple(sub.apply(p) for p in r.premises),
                    r.major,
                    Instance(r.id, sub),
                )
            )
    return System(tuple(out), s.signature, s.flags | {"hatted"})


def specialise(rule: Rule, a: Atom) -> Rule:
    """``rule`` with its conclusion narrowed to the basis pattern of ``a``."""
    if _in_basis(rule.conclusion):
        return rule
    sub = Subst((), False) if not a.word else Subst(a.word[:1], True)
    return Rule(rule.id, sub.apply(rule.conclusion), tuple(sub.apply(p) for p in rule.premises), rule.major)


def complement(s: System, prefix: str = "c", limit: int = DEFAULT_COMPLEMENT_LIMIT) -> System:
    """Cross-product complement of a hatted system.

    Rule ids are ``prefix`` followed by a running number; each rule's
    Selection provenance lists every selection map that simplifies to it.
    """
    if "hatted" not in s.flags:
        raise ComplementError("complement needs a hatted system; apply hat() first")
    groups: dict[Pattern, list[Rule]] = {}
    for r in s:
        groups.setdefault(r.conclusion, []).append(r)
    shapes: dict = {}
    order: list = []
    for b in conclusion_basis(s.signature):
        rules = groups.get(b, [])
        count = math.prod(len(r.premises) for r in rules)
        if count > limit:
            raise ComplementError(
                f"complement of {b} would have {count} rules (limit {limit})"
            )
        for choice in itertools.product(*(range(len(r.premises)) for r in rules)):
            premises, _ = _dedupe([r.premises[j] for r, j in zip(rules, choice)])
            key = (b, frozenset(premises))
            sel = tuple((r.id, j) for r, j in zip(rules, choice))
            if key in shapes:
                shapes[key][1].append(sel)
            else:
                shapes[key] = (premises, [sel])
                order.append(key)
    out = []
    for n, key in enumerate(order, 1):
        premises, sels = shapes[key]
        out.append(Rule(f"{prefix}{n}", key[0], premises, (), Selection(tuple(sels))))
    return System(tuple(out), s.signature, {"hatted", "complement"})


def complementation(s: System, prefix: str = "c") -> SignedSystem:
    hatted = hat(s)
    return SignedSystem(hatted, complement(hatted, prefix))


def selection_rule(
    negative: System, a: Atom, positive_ids: tuple[str, ...], choice: tuple[int, ...]
) -> Optional[Rule]:
    """The complement rule concluding ``a`` that records the given selection map."""
    return negative.selections.get((basis_pattern(a), tuple(zip(positive_ids, choice))))


def positive_group(positive: System, a: Atom) -> list[Rule]:
    """Positive rules whose conclusion is the basis pattern of ``a``, in order."""
    b = basis_pattern(a)
    return [r for r in positive.by_predicate.get(a.predicate, ()) if r.conclusion == b]
