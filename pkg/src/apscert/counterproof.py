"""Unfolding finite refutations into counter-proofs of the original system.

A refutation of ``A`` in the complemented automaton is finite.  The
counter-proof in the complemented original system is generally infinite:
for every original rule concluding ``A`` it names one premise that is
itself refutable, and continues below that premise.  The premise is found
by induction on the rank of the rule, never by re-running the decision
procedure; ``select_refutable_premise_naive`` is the decision-based
variant kept as a cross-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import AbstractSet, Optional, Sequence

from .complement import complementation, positive_group, selection_rule, specialise
from .core import (
    GROUND,
    Atom,
    Binding,
    Instance,
    Polarity,
    Proof,
    Rule,
    SignedSystem,
    System,
    compose_rule,
    match_pattern,
    rule_instances_concluding,
)
from .decide import DecisionSession, Verdict
from .saturation import SaturatedSystem, extract_automaton, saturate

DEFAULT_WORK_LIMIT = 1_000_000


class UnfoldError(RuntimeError):
    """An internal invariant of the construction failed."""


class CombinatorialError(UnfoldError):
    pass


def _avoiding_tuple(families: Sequence[Sequence[AbstractSet]], w: AbstractSet):
    """A choice of one set per family whose union misses ``w``, or None."""
    picked = []
    for fam in families:
        hit = next((i for i, h in enumerate(fam) if not (h & w)), None)
        if hit is None:
            return None
        picked.append(hit)
    return tuple(picked)


def combinatorial_select(families: Sequence[Sequence[AbstractSet]], w: AbstractSet) -> int:
    """Index of a family all of whose sets meet ``w`` (0-based).

    Requires that every union taking one set from each family meets
    ``w``.  Follows the induction on the number of families: if the
    first n-1 families already satisfy the requirement recurse on them,
    otherwise the last family is the answer.  This yields the smallest
    such index.
    """
    if not families:
        raise CombinatorialError("no families")
    bad = _avoiding_tuple(families, w)
    if bad is not None:
        raise CombinatorialError(f"selection {bad} avoids every element of W")
    n = len(families)
    while n > 1 and _avoiding_tuple(families[: n - 1], w) is None:
        n -= 1
    l = n - 1
    if not all(h & w for h in families[l]):
        raise CombinatorialError(f"family {l} does not meet W in every set")
    return l


@dataclass
class Selected:
    index: int
    premise: Atom
    certificate: Proof


@dataclass
class CounterProofPrefix:
    proof: Proof
    loops: tuple[tuple[int, ...], ...] = ()


@dataclass
class UnfoldContext:
    saturated: SaturatedSystem
    i_j: SignedSystem
    session: DecisionSession
    work_limit: int = DEFAULT_WORK_LIMIT
    memo: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    work: int = 0

    @classmethod
    def from_system(cls, s: System, **kw) -> UnfoldContext:
        ss = saturate(s)
        session = DecisionSession(extract_automaton(ss))
        return cls(ss, complementation(s, "j"), session, **kw)

    @property
    def base(self) -> System:
        return self.saturated.base

    @property
    def automaton(self) -> System:
        return self.session.automaton

    @property
    def a_b(self) -> SignedSystem:
        return self.session.signed

    def certificate(self, a: Atom) -> Proof:
        """The refutation of ``a`` in the complemented automaton used for selections."""
        if a not in self.certificates:
            self.certificates[a] = self.session.refute(a)
        return self.certificates[a]

    def _tick(self) -> None:
        self.work += 1
        if self.work > self.work_limit:
            raise UnfoldError(f"work limit {self.work_limit} exceeded")


def _binding(rule: Rule, a: Atom) -> Binding:
    b = match_pattern(rule.conclusion, a)
    if b is None:
        raise UnfoldError(f"rule {rule.id} does not conclude {a}")
    return b


def _hat_counterpart(positive: System, rule: Rule, a: Atom) -> Rule:
    key = specialise(rule, a).key
    for r in positive_group(positive, a):
        if r.key == key:
            return r
    raise UnfoldError(f"rule {rule.id} has no specialised counterpart concluding {a}")


def _assemble(ctx: UnfoldContext, c: Atom, w: dict[Atom, Proof]) -> Proof:
    """Refutation of ``c``: pick, per automaton rule concluding it, a premise in ``w``."""
    group = positive_group(ctx.a_b.positive, c)
    choice = []
    for r in group:
        _, prems = r.instance(_binding(r, c))
        j = next((k for k, p in enumerate(prems) if p in w), None)
        if j is None:
            raise UnfoldError(f"rule {r.id} concluding {c} has no premise in W")
        choice.append(j)
    neg = selection_rule(ctx.a_b.negative, c, tuple(r.id for r in group), tuple(choice))
    if neg is None:
        raise UnfoldError(f"no complement rule for selection {choice} at {c}")
    b = _binding(neg, c)
    _, prems = neg.instance(b)
    return Proof(c, neg.id, b, tuple(w[p] for p in prems), Polarity.REFUTED)


def select_refutable_premise(ctx: UnfoldContext, rule_id: str, binding: Binding, a: Atom) -> Selected:
    """A refutable premise of an instance of a closure rule concluding refutable ``a``.

    The instance is ``rule_id`` at ``binding``.  Works by induction on the
    rank of the rule, returning the premise with its refutation.
    """
    key = (rule_id, binding, a)
    if key in ctx.memo:
        return ctx.memo[key]
    ctx._tick()
    ss = ctx.saturated
    rule = ss.rules[rule_id]
    concl, prems = rule.instance(binding)
    if concl != a:
        raise UnfoldError(f"rule {rule_id} at {binding!r} concludes {concl}, not {a}")
    cert = ctx.certificate(a)
    if ss.rank_table[rule.id] == 0:
        counterpart = _hat_counterpart(ctx.a_b.positive, rule, a)
        root = ctx.a_b.negative[cert.rule]
        chosen = dict(root.provenance.choices[0])
        _, cprems = counterpart.instance(_binding(counterpart, a))
        i = prems.index(cprems[chosen[counterpart.id]])
        sub = next((k for k in cert.children if k.atom == prems[i]), None)
        if sub is None:
            raise UnfoldError(f"certificate of {a} lacks premise {prems[i]}")
        result = Selected(i, prems[i], sub)
    else:
        result = _select_by_rank(ctx, rule, prems, a)
    ctx.memo[key] = result
    return result


def _select_by_rank(ctx: UnfoldContext, rule: Rule, prems: tuple[Atom, ...], a: Atom) -> Selected:
    ss = ctx.saturated
    families = []
    for pos, c in enumerate(prems):
        if pos not in rule.major:
            families.append([None])
            continue
        insts = rule_instances_concluding(ctx.automaton, c)
        if not insts:
            # empty product: c has no automaton rule at all, so it is refutable outright
            return Selected(pos, c, ctx.certificate(c))
        families.append(insts)

    w: dict[Atom, Proof] = {}
    for choice in itertools.product(*families):
        ctx._tick()
        parts = [None if inst is None else inst.rule for inst in choice]
        member = ss.rules.find(compose_rule(rule, parts))
        if member is None:
            raise UnfoldError(f"composition of {rule.id} with {parts} is missing from the closure")
        if ss.rank_table[member.id] >= ss.rank_table[rule.id]:
            raise UnfoldError(f"rank does not decrease from {rule.id} to {member.id}")
        b = GROUND if member.is_ground else _binding(member, a)
        _, mprems = member.instance(b)
        union = set()
        for pos, inst in enumerate(choice):
            union.update(inst.premises if inst is not None else (prems[pos],))
        if set(mprems) != union:
            raise UnfoldError(f"premises of {member.id} differ from the composed instance")
        sel = select_refutable_premise(ctx, member.id, b, a)
        w.setdefault(sel.premise, sel.certificate)

    sets = [
        [frozenset(inst.premises) if inst is not None else frozenset({prems[pos]}) for inst in fam]
        for pos, fam in enumerate(families)
    ]
    l = combinatorial_select(sets, w.keys())
    c = prems[l]
    if l not in rule.major:
        return Selected(l, c, w[c])
    if c not in ctx.certificates:
        ctx.certificates[c] = _assemble(ctx, c, w)
    return Selected(l, c, ctx.certificates[c])


def select_refutable_premise_naive(ctx: UnfoldContext, rule_id: str, binding: Binding, a: Atom) -> Selected:
    """First premise the decision procedure marks refutable."""
    _, prems = ctx.saturated.rules[rule_id].instance(binding)
    for i, c in enumerate(prems):
        if ctx.session.decide(c) is Verdict.REFUTABLE:
            return Selected(i, c, ctx.session.refute(c))
    raise UnfoldError(f"no refutable premise for rule {rule_id} concluding {a}")


def _base_instance(rule: Rule, b: Binding) -> tuple[str, Binding]:
    prov = rule.provenance
    if isinstance(prov, Instance):
        return prov.base, prov.subst.bind(b)
    return rule.id, b


def unfold(ctx: UnfoldContext, a: Atom, depth: int, naive: bool = False) -> CounterProofPrefix:
    """Depth-bounded prefix of the counter-proof of ``a``."""
    if ctx.session.decide(a) is not Verdict.REFUTABLE:
        raise UnfoldError(f"{a} is provable; it has no counter-proof")
    select = select_refutable_premise_naive if naive else select_refutable_premise
    ctx.certificate(a)
    loops: list[tuple[int, ...]] = []

    def build(c: Atom, d: int, path: tuple[int, ...], ancestors: frozenset) -> Proof:
        if c in ancestors:
            loops.append(path)
        if d <= 0:
            return Proof(c, polarity=Polarity.REFUTED, expanded=False)
        group = positive_group(ctx.i_j.positive, c)
        choice = []
        wanted = set()
        for r in group:
            b = _binding(r, c)
            base_id, base_b = _base_instance(r, b)
            sel = select(ctx, base_id, base_b, c)
            _, prems = r.instance(b)
            if prems[sel.index] != sel.premise:
                raise UnfoldError(f"premise mismatch between {r.id} and {base_id}")
            ctx.certificates.setdefault(sel.premise, sel.certificate)
            choice.append(sel.index)
            wanted.add(sel.premise)
        neg = selection_rule(ctx.i_j.negative, c, tuple(r.id for r in group), tuple(choice))
        if neg is None:
            raise UnfoldError(f"selected premises {sorted(map(str, wanted))} match no complement rule")
        b = _binding(neg, c)
        _, prems = neg.instance(b)
        if set(prems) != wanted:
            raise UnfoldError(f"complement rule {neg.id} does not match the selection at {c}")
        inner = ancestors | {c}
        kids = tuple(build(p, d - 1, path + (k,), inner) for k, p in enumerate(prems))
        return Proof(c, neg.id, b, kids, Polarity.REFUTED)

    return CounterProofPrefix(build(a, depth, (), frozenset()), tuple(loops))
