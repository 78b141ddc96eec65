"""Saturation of an alternating pushdown system and its automaton.

Saturation closes a system under one operation: take a non-introduction
rule, compose each of its major premises with an introduction rule,
simplify, add.  The introduction rules of the closure form an automaton
proving the same atoms; composition provenance lets automaton proofs be
replayed in the original system.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Sequence

from .core import (
    APS_CLASSES,
    GROUND,
    Binding,
    ComposeError,
    Composed,
    Proof,
    Rule,
    RuleClass,
    System,
    aps_class,
    compose_rule,
    match_pattern,
    unify,
)

DEFAULT_RULE_LIMIT = 100_000

# shapes saturation of an APS may add
_ADDED_SHAPES = frozenset({RuleClass.INTRO, RuleClass.NEUTRAL, RuleClass.ARBITRARY, RuleClass.EMPTY})


class SaturationError(ValueError):
    pass


class RankCycleError(SaturationError):
    pass


def compositions(
    g: Rule, intros: Sequence[Rule], fixed: Optional[tuple[int, Rule]] = None
) -> Iterator[tuple[tuple[Optional[Rule], ...], Rule]]:
    """Every simplified composition of ``g``'s major premises with ``intros``.

    Yields (parts, composed rule) pairs; ``parts`` has None at the
    non-major positions.  With ``fixed=(i, f)`` only tuples using ``f`` at
    major position ``i`` are produced.
    """
    if not g.major:
        return
    candidates = []
    for i in g.major:
        if fixed is not None and fixed[0] == i:
            pool = [fixed[1]]
        else:
            pool = intros
        prem = g.premises[i]
        candidates.append([f for f in pool if unify(prem, f.conclusion) is not None])
        if not candidates[-1]:
            return
    for choice in itertools.product(*candidates):
        parts: list[Optional[Rule]] = [None] * len(g.premises)
        for i, f in zip(g.major, choice):
            parts[i] = f
        try:
            yield tuple(parts), compose_rule(g, parts)
        except ComposeError:
            continue


@dataclass(frozen=True)
class SaturatedSystem:
    base: System
    rules: System

    @cached_property
    def intros(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.is_intro)

    @cached_property
    def rank_table(self) -> dict[str, int]:
        table: dict[str, int] = {}
        for r in self.rules:
            _rank(self, r, table, set())
        return table

    def derived(self, g: Rule) -> list[tuple[tuple[Optional[Rule], ...], Rule]]:
        """Compositions of ``g`` with intros of the closure, as closure members."""
        out = []
        for parts, composed in compositions(g, self.intros):
            member = self.rules.find(composed)
            if member is None:
                raise SaturationError(
                    f"composition of {g.id} with "
                    f"{[p.id for p in parts if p is not None]} is missing from the closure"
                )
            out.append((parts, member))
        return out


def saturate(s: System, limit: int = DEFAULT_RULE_LIMIT) -> SaturatedSystem:
    """Worklist closure of ``s`` under composition with introduction rules."""
    for r in s:
        if aps_class(r.conclusion, r.premises) not in APS_CLASSES:
            raise SaturationError(f"rule {r.id} is not an alternating pushdown rule: {r}")

    rules: list[Rule] = list(s.rules)
    keys = {r.key for r in rules}
    done_intro: list[Rule] = []
    done_other: list[Rule] = []
    queue = deque(rules)
    counter = itertools.count(1)

    def add(parts, composed: Rule) -> None:
        if composed.key in keys:
            return
        shape = aps_class(composed.conclusion, composed.premises)
        if shape not in _ADDED_SHAPES:
            raise SaturationError(f"saturation produced an unexpected shape: {composed}")
        new = Rule(
            f"s{next(counter)}",
            composed.conclusion,
            composed.premises,
            composed.major,
            composed.provenance,
        )
        keys.add(new.key)
        rules.append(new)
        queue.append(new)
        if len(rules) > limit:
            raise SaturationError(f"saturation exceeded {limit} rules")

    while queue:
        r = queue.popleft()
        if r.is_intro:
            done_intro.append(r)
            for g in list(done_other):
                for i in g.major:
                    if unify(g.premises[i], r.conclusion) is None:
                        continue
                    for parts, composed in compositions(g, done_intro, fixed=(i, r)):
                        add(parts, composed)
        else:
            done_other.append(r)
            for parts, composed in compositions(r, done_intro):
                add(parts, composed)

    closure = System(tuple(rules), s.signature, s.flags | {"saturated"})
    return SaturatedSystem(s, closure)


def extract_automaton(ss: SaturatedSystem) -> System:
    flags = {"automaton"} | ({"aps_shaped"} if "aps_shaped" in ss.rules.flags else set())
    return System(ss.intros, ss.rules.signature, flags)


def _rank(ss: SaturatedSystem, r: Rule, table: dict[str, int], active: set[str]) -> int:
    if r.id in table:
        return table[r.id]
    if r.is_intro:
        table[r.id] = 0
        return 0
    if r.id in active:
        raise RankCycleError(f"composition chain revisits rule {r.id}")
    active.add(r.id)
    best = 0
    for _, member in ss.derived(r):
        if not member.is_intro:
            best = max(best, _rank(ss, member, table, active))
    active.discard(r.id)
    table[r.id] = best + 1
    return best + 1


def rank(ss: SaturatedSystem, rule_id: str) -> int:
    return ss.rank_table[ss.rules[rule_id].id]


# -- cuts --------------------------------------------------------------------


def _is_cut(rules: System, node: Proof) -> bool:
    if not node.expanded or node.rule is None:
        return False
    r = rules[node.rule]
    if r.is_intro:
        return False
    for i in r.major:
        child = node.children[i]
        if not child.expanded or child.rule is None or not rules[child.rule].is_intro:
            return False
    return True


def find_cut(rules: System, pf: Proof) -> Optional[tuple[int, ...]]:
    """Path of the first cut in pre-order, or None for a cut-free proof."""
    for path, node in pf.walk():
        if _is_cut(rules, node):
            return path
    return None


def _reduce_cut(ss: SaturatedSystem, node: Proof) -> Proof:
    g = ss.rules[node.rule]
    parts: list[Optional[Rule]] = [None] * len(g.premises)
    pool: list[Proof] = []
    for i, child in enumerate(node.children):
        if i in g.major:
            parts[i] = ss.rules[child.rule]
            pool.extend(child.children)
        else:
            pool.append(child)
    composed = compose_rule(g, parts)
    member = ss.rules.find(composed)
    if member is None:
        raise SaturationError(f"cut over {g.id} has no composed rule in the closure")
    b = match_pattern(member.conclusion, node.atom)
    if b is None:
        raise SaturationError(f"composed rule {member.id} does not conclude {node.atom}")
    _, prems = member.instance(b)
    by_atom: dict = {}
    for p in pool:
        by_atom.setdefault(p.atom, p)
    kids = []
    for a in prems:
        if a not in by_atom:
            raise SaturationError(f"no subproof for premise {a} of {member.id}")
        kids.append(by_atom[a])
    return Proof(node.atom, member.id, b, tuple(kids), node.polarity)


def eliminate_cuts(ss: SaturatedSystem, pf: Proof) -> Proof:
    """Innermost-first replacement of cuts by composed rules of the closure."""

    def reduce(node: Proof) -> Proof:
        if not node.children:
            return node
        node = Proof(
            node.atom,
            node.rule,
            node.binding,
            tuple(reduce(c) for c in node.children),
            node.polarity,
            node.expanded,
        )
        while _is_cut(ss.rules, node):
            node = _reduce_cut(ss, node)
        return node

    return reduce(pf)


# -- lifting -----------------------------------------------------------------


def _expand(ss: SaturatedSystem, rule: Rule, binding: Binding, kids: Sequence[Proof], polarity) -> Proof:
    prov = rule.provenance
    if rule.id in ss.base:
        atom = rule.instance(binding)[0]
        return Proof(atom, rule.id, binding, tuple(kids), polarity)
    if not isinstance(prov, Composed):
        raise SaturationError(f"rule {rule.id} has no composition provenance")
    g = ss.rules[prov.base]
    g_binding = GROUND if prov.base_subst is None else prov.base_subst.bind(binding)
    g_kids: list[Proof] = []
    pos = 0
    for i, part_id in enumerate(prov.parts):
        if part_id is None:
            g_kids.append(kids[prov.simplification[pos]])
            pos += 1
            continue
        f = ss.rules[part_id]
        sub = prov.part_substs[i]
        f_binding = GROUND if sub is None else sub.bind(binding)
        f_kids = [kids[prov.simplification[pos + k]] for k in range(len(f.premises))]
        pos += len(f.premises)
        g_kids.append(_expand(ss, f, f_binding, f_kids, polarity))
    return _expand(ss, g, g_binding, g_kids, polarity)


def lift_proof(ss: SaturatedSystem, pf: Proof) -> Proof:
    """Replay composition provenance to get a proof in the base system."""
    kids = [lift_proof(ss, c) for c in pf.children]
    if pf.rule not in ss.rules:
        raise SaturationError(f"unknown rule {pf.rule!r}")
    return _expand(ss, ss.rules[pf.rule], pf.binding, kids, pf.polarity)
