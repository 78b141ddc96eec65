"""Decision procedure over an automaton and certificate construction.

Every automaton rule shrinks words, so bottom-up search for an atom
recurses only on strictly shorter atoms and always terminates.  A failed
search is witnessed by a finite proof in the complement of the automaton.
"""

from __future__ import annotations

import enum
import itertools
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional

from .complement import complementation, positive_group
from .core import (
    Atom,
    Polarity,
    Proof,
    Signature,
    SignedSystem,
    System,
    rule_instances_concluding,
)


class Verdict(enum.Enum):
    PROVABLE = "provable"
    REFUTABLE = "refutable"


class DecisionError(ValueError):
    pass


class DecisionSession:
    """Memoised decisions for one automaton and its complementation."""

    def __init__(self, automaton: System, signed: Optional[SignedSystem] = None):
        if not all(r.is_intro for r in automaton):
            raise DecisionError("decision sessions need an automaton (introduction rules only)")
        self.automaton = automaton
        self.signed = signed if signed is not None else complementation(automaton, "b")
        self.memo: dict[Atom, Verdict] = {}
        self._witness: dict = {}
        self._proofs: dict[Atom, Proof] = {}
        self._refutations: dict[Atom, Proof] = {}

    @property
    def signature(self) -> Signature:
        return self.automaton.signature

    def _check_atom(self, a: Atom) -> None:
        if not self.signature.admits(a):
            raise DecisionError(f"atom {a} is not over the signature of the system")

    def decide(self, a: Atom) -> Verdict:
        self._check_atom(a)
        # explicit stack: depth is bounded by word length, which may be long
        stack = [a]
        while stack:
            top = stack[-1]
            if top in self.memo:
                stack.pop()
                continue
            pending = None
            verdict = Verdict.REFUTABLE
            for inst in rule_instances_concluding(self.automaton, top):
                unknown = [p for p in inst.premises if p not in self.memo]
                if unknown:
                    pending = unknown
                    break
                if all(self.memo[p] is Verdict.PROVABLE for p in inst.premises):
                    verdict = Verdict.PROVABLE
                    self._witness[top] = inst
                    break
            if pending:
                stack.extend(pending)
                continue
            self.memo[top] = verdict
            stack.pop()
        return self.memo[a]

    def prove(self, a: Atom) -> Proof:
        if self.decide(a) is not Verdict.PROVABLE:
            raise DecisionError(f"{a} is not provable")
        return self._prove(a)

    def _prove(self, a: Atom) -> Proof:
        if a not in self._proofs:
            inst = self._witness[a]
            kids = tuple(self._prove(p) for p in inst.premises)
            self._proofs[a] = Proof(a, inst.rule.id, inst.binding, kids, Polarity.PROVED)
        return self._proofs[a]

    def refute(self, a: Atom) -> Proof:
        if self.decide(a) is not Verdict.REFUTABLE:
            raise DecisionError(f"{a} is provable, it has no refutation")
        return self._refute(a)

    def _refute(self, a: Atom) -> Proof:
        if a in self._refutations:
            return self._refutations[a]
        for inst in rule_instances_concluding(self.signed.negative, a):
            if all(self.decide(p) is Verdict.REFUTABLE for p in inst.premises):
                kids = tuple(self._refute(p) for p in inst.premises)
                pf = Proof(a, inst.rule.id, inst.binding, kids, Polarity.REFUTED)
                self._refutations[a] = pf
                return pf
        raise DecisionError(f"no complement rule refutes {a}; the complement is broken")

    def selection_of(self, a: Atom) -> dict[str, int]:
        """For the root rule of the refutation of ``a``: positive rule id -> premise index."""
        rule = self.signed.negative[self.refute(a).rule]
        return dict(rule.provenance.choices[0])

    def positive_group(self, a: Atom):
        return positive_group(self.signed.positive, a)


def decide(sess: DecisionSession, a: Atom) -> Verdict:
    return sess.decide(a)


def prove(sess: DecisionSession, a: Atom) -> Proof:
    return sess.prove(a)


def refute(sess: DecisionSession, a: Atom) -> Proof:
    return sess.refute(a)


# -- Kleene oracle -----------------------------------------------------------


@dataclass(frozen=True)
class KleeneResult:
    atoms: frozenset[Atom]
    stabilized: bool
    steps: int


def words_upto(symbols: Iterable[str], max_len: int) -> list[tuple[str, ...]]:
    syms = sorted(symbols)
    out: list[tuple[str, ...]] = []
    for n in range(max_len + 1):
        out.extend(itertools.product(syms, repeat=n))
    return out


def atoms_upto(sig: Signature, max_len: int) -> list[Atom]:
    return [Atom(p, w) for p in sorted(sig.predicates) for w in words_upto(sig.symbols, max_len)]


def suffix_universe(sig: Signature, words: Iterable[tuple[str, ...]]) -> frozenset[Atom]:
    suffixes = {tuple(w)[i:] for w in words for i in range(len(w) + 1)}
    return frozenset(Atom(p, w) for p in sig.predicates for w in suffixes)


def is_suffix_closed(universe: Iterable[Atom]) -> bool:
    u = set(universe)
    return all(Atom(a.predicate, a.word[1:]) in u for a in u if a.word)


def kleene(s: System, universe: Iterable[Atom], steps: Optional[int] = None) -> KleeneResult:
    """Iterate the one-step consequence operator of ``s`` clipped to ``universe``.

    Stops after ``steps`` rounds or when a round adds nothing.
    """
    u = frozenset(universe)
    if not is_suffix_closed(u):
        warnings.warn("universe is not suffix-closed; the result may be an under-approximation")
    premises = {a: [inst.premises for inst in rule_instances_concluding(s, a)] for a in u}
    known: frozenset[Atom] = frozenset()
    n = 0
    while steps is None or n < steps:
        nxt = frozenset(
            a for a, options in premises.items() if any(all(p in known for p in ps) for ps in options)
        )
        n += 1
        if nxt == known:
            return KleeneResult(known, True, n)
        known = nxt
    return KleeneResult(known, False, n)
