"""Atoms, one-variable patterns, rules, systems and proof trees.

Every rule of an alternating pushdown system mentions a single stack
variable ``x``.  A pattern is therefore a predicate applied either to
``prefix . x`` (a *var* pattern) or to a closed word (a *ground* pattern),
and a rule instance is fixed by the word bound to ``x``.

The introduction order used throughout is word length: a rule is an
introduction rule when every premise of every instance is strictly
shorter than its conclusion.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

Word = tuple[str, ...]

NAME_RE = re.compile(r"^[A-Za-z0-9_]+$")
VARIABLE = "x"
EMPTY_WORD = "eps"


class RuleError(ValueError):
    """A rule violates the one-variable pattern discipline."""


class ComposeError(ValueError):
    """Premise and conclusion patterns do not unify."""


class ProofError(ValueError):
    pass


def format_word(word: Sequence[str]) -> str:
    return " ".join(word) if word else EMPTY_WORD


class _Ground:
    """Binding of a rule whose patterns are all closed."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "GROUND"

    def __reduce__(self):
        return (_Ground, ())


GROUND = _Ground()
Binding = Union[Word, _Ground]


@dataclass(frozen=True, order=True)
class Atom:
    predicate: str
    word: Word = ()

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))

    def __str__(self) -> str:
        return f"{self.predicate}({format_word(self.word)})"


@dataclass(frozen=True, order=True)
class Pattern:
    """``predicate(prefix . x)`` when ``var`` is set, else ``predicate(prefix)``."""

    predicate: str
    prefix: Word = ()
    var: bool = True

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))

    def __str__(self) -> str:
        if self.var:
            return f"{self.predicate}({' '.join(self.prefix + (VARIABLE,))})"
        return f"{self.predicate}({format_word(self.prefix)})"


class Subst(NamedTuple):
    """Substitution ``x := prefix . z`` (var) or ``x := prefix`` (ground)."""

    prefix: Word
    var: bool = True

    def apply(self, p: Pattern) -> Pattern:
        if not p.var:
            return p
        return Pattern(p.predicate, p.prefix + self.prefix, self.var)

    def then(self, other: Subst) -> Subst:
        """The substitution applying ``self`` first and ``other`` to its variable."""
        if not self.var:
            return self
        return Subst(self.prefix + other.prefix, other.var)

    def bind(self, binding: Binding) -> Binding:
        """Binding of the original variable, given the binding of the new one."""
        if not self.var:
            return self.prefix
        if binding is GROUND:
            raise RuleError("var substitution applied to a ground binding")
        return self.prefix + tuple(binding)


IDENTITY = Subst((), True)


def match_pattern(p: Pattern, a: Atom) -> Optional[Binding]:
    if p.predicate != a.predicate:
        return None
    if not p.var:
        return GROUND if p.prefix == a.word else None
    n = len(p.prefix)
    if a.word[:n] != p.prefix:
        return None
    return a.word[n:]


def instantiate(p: Pattern, binding: Binding) -> Atom:
    if not p.var:
        return Atom(p.predicate, p.prefix)
    if binding is GROUND:
        raise RuleError(f"pattern {p} needs a word binding")
    return Atom(p.predicate, p.prefix + tuple(binding))


def unify(p: Pattern, q: Pattern) -> Optional[tuple[Subst, Subst]]:
    """Most general unifier of two patterns over distinct variables.

    Returns substitutions for the variable of ``p`` and of ``q`` into a
    common fresh variable, or None on a clash.  The substitution of a
    ground side is irrelevant and returned as IDENTITY.
    """
    if p.predicate != q.predicate:
        return None
    u, v = p.prefix, q.prefix
    if p.var and q.var:
        if len(u) <= len(v):
            if v[: len(u)] != u:
                return None
            return Subst(v[len(u):]), IDENTITY
        if u[: len(v)] != v:
            return None
        return IDENTITY, Subst(u[len(v):])
    if p.var:
        if v[: len(u)] != u:
            return None
        return Subst(v[len(u):], False), IDENTITY
    if q.var:
        if u[: len(v)] != v:
            return None
        return IDENTITY, Subst(u[len(v):], False)
    return (IDENTITY, IDENTITY) if u == v else None


class RuleClass(enum.Enum):
    INTRO = "intro"
    ELIM = "elim"
    NEUTRAL = "neutral"
    ARBITRARY = "arbitrary"
    EMPTY = "empty"
    DERIVED = "derived-non-intro"


APS_CLASSES = frozenset(
    {RuleClass.INTRO, RuleClass.ELIM, RuleClass.NEUTRAL, RuleClass.ARBITRARY, RuleClass.EMPTY}
)


# -- provenance --------------------------------------------------------------


@dataclass(frozen=True)
class Primitive:
    pass


PRIMITIVE = Primitive()


@dataclass(frozen=True)
class Composed:
    """``base`` composed with ``parts`` (None marks an identity position).

    ``base_subst``/``part_substs`` carry the variable of each ingredient
    into the variable of the composed rule (None for ground ingredients),
    and ``simplification`` maps each position of the concatenated premise
    list to its index after duplicate removal.
    """

    base: str
    parts: tuple[Optional[str], ...]
    base_subst: Optional[Subst]
    part_substs: tuple[Optional[Subst], ...]
    simplification: tuple[int, ...]


@dataclass(frozen=True)
class Instance:
    """Rule obtained by substituting into the variable of ``base``."""

    base: str
    subst: Subst


@dataclass(frozen=True)
class Selection:
    """Complement rule: one premise chosen from each positive rule.

    ``choices`` lists every selection map that collapses to this rule; a
    selection map is a tuple of (positive rule id, premise index).
    """

    choices: tuple[tuple[tuple[str, int], ...], ...]


Provenance = Union[Primitive, Composed, Instance, Selection]


# -- rules -------------------------------------------------------------------


def _introduction_test(conclusion: Pattern, premises: Sequence[Pattern]) -> bool:
    if not conclusion.var and any(p.var for p in premises):
        raise RuleError(
            f"variable occurs in a premise but not in the ground conclusion {conclusion}"
        )
    return all(len(p.prefix) < len(conclusion.prefix) for p in premises)


def aps_class(conclusion: Pattern, premises: Sequence[Pattern]) -> Optional[RuleClass]:
    """The alternating-pushdown shape of a rule, or None if it has none."""
    if not conclusion.var:
        if conclusion.prefix == () and not premises:
            return RuleClass.EMPTY
        return None
    if not all(p.var for p in premises):
        return None
    lengths = [len(p.prefix) for p in premises]
    if len(conclusion.prefix) == 1:
        return RuleClass.INTRO if all(n == 0 for n in lengths) else None
    if conclusion.prefix:
        return None
    if not premises:
        return RuleClass.ARBITRARY
    if all(n == 0 for n in lengths):
        return RuleClass.NEUTRAL
    if lengths[0] == 1 and all(n == 0 for n in lengths[1:]):
        return RuleClass.ELIM
    return None


def classify(conclusion: Pattern, premises: Sequence[Pattern]) -> tuple[RuleClass, bool]:
    intro = _introduction_test(conclusion, premises)
    shape = aps_class(conclusion, premises)
    if shape is not None:
        return shape, intro
    return (RuleClass.INTRO if intro else RuleClass.DERIVED), intro


def _dedupe(premises: Sequence[Pattern]) -> tuple[tuple[Pattern, ...], tuple[int, ...]]:
    kept: list[Pattern] = []
    index: dict[Pattern, int] = {}
    mapping = []
    for p in premises:
        if p not in index:
            index[p] = len(kept)
            kept.append(p)
        mapping.append(index[p])
    return tuple(kept), tuple(mapping)


@dataclass(frozen=True)
class Rule:
    """``conclusion <- premises``; ``major`` holds 0-based premise positions.

    ``major`` is recomputed for elimination (leftmost premise) and neutral
    (every premise) shapes and cleared for introduction rules.  For other
    non-introduction rules a given nonempty ``major`` is kept, otherwise
    the premises that are not strictly smaller than the conclusion are used.
    """

    id: str
    conclusion: Pattern
    premises: tuple[Pattern, ...] = ()
    major: tuple[int, ...] = ()
    provenance: Provenance = field(default=PRIMITIVE, compare=False)

    def __post_init__(self):
        premises = tuple(self.premises)
        object.__setattr__(self, "premises", premises)
        kind, intro = classify(self.conclusion, premises)
        if intro:
            major: tuple[int, ...] = ()
        elif kind is RuleClass.ELIM:
            major = (0,)
        elif kind is RuleClass.NEUTRAL:
            major = tuple(range(len(premises)))
        elif self.major:
            major = tuple(sorted(set(self.major)))
            if major[0] < 0 or major[-1] >= len(premises):
                raise RuleError(f"major position out of range in rule {self.id}")
        else:
            size = len(self.conclusion.prefix)
            major = tuple(i for i, p in enumerate(premises) if len(p.prefix) >= size)
        object.__setattr__(self, "major", major)
        object.__setattr__(self, "_kind", kind)
        object.__setattr__(self, "_intro", intro)

    @property
    def kind(self) -> RuleClass:
        return self._kind

    @property
    def is_intro(self) -> bool:
        return self._intro

    @property
    def is_ground(self) -> bool:
        return not self.conclusion.var and not any(p.var for p in self.premises)

    @property
    def key(self) -> tuple[Pattern, frozenset[Pattern]]:
        """Structural identity: conclusion and premise set."""
        return self.conclusion, frozenset(self.premises)

    def instance(self, binding: Binding) -> tuple[Atom, tuple[Atom, ...]]:
        return (
            instantiate(self.conclusion, binding),
            tuple(instantiate(p, binding) for p in self.premises),
        )

    def __str__(self) -> str:
        if not self.premises:
            return f"{self.conclusion}."
        return f"{self.conclusion} <- {', '.join(map(str, self.premises))}."


def classify_rule(r: Rule) -> tuple[RuleClass, bool]:
    return classify(r.conclusion, r.premises)


def simplify_rule(r: Rule) -> Rule:
    premises, mapping = _dedupe(r.premises)
    if len(premises) == len(r.premises):
        return r
    major = tuple(sorted({mapping[i] for i in r.major}))
    return Rule(r.id, r.conclusion, premises, major, r.provenance)


def compose_rule(g: Rule, fs: Sequence[Optional[Rule]], new_id: str = "") -> Rule:
    """Simplified derivable rule ``g(f_1(...), ..., f_n(...))``.

    ``None`` in ``fs`` stands for the identity at that premise position.
    Raises ComposeError when a conclusion does not unify with its premise.
    """
    if len(fs) != len(g.premises):
        raise ComposeError(f"rule {g.id} has {len(g.premises)} premises, got {len(fs)} parts")
    sg = IDENTITY
    subs: list[Optional[Subst]] = [None] * len(fs)
    for i, f in enumerate(fs):
        if f is None:
            continue
        res = unify(sg.apply(g.premises[i]), f.conclusion)
        if res is None:
            raise ComposeError(
                f"premise {g.premises[i]} of {g.id} does not unify with {f.conclusion} of {f.id}"
            )
        tg, tf = res
        sg = sg.then(tg)
        for j in range(i):
            if subs[j] is not None:
                subs[j] = subs[j].then(tg)
        subs[i] = tf

    concat: list[Pattern] = []
    origin: list[int] = []
    for i, f in enumerate(fs):
        if f is None:
            concat.append(sg.apply(g.premises[i]))
            origin.append(i)
        else:
            concat.extend(subs[i].apply(q) for q in f.premises)
            origin.extend([i] * len(f.premises))
    premises, mapping = _dedupe(concat)

    major_src = set(g.major)
    major = sorted({mapping[k] for k, i in enumerate(origin) if i in major_src})
    provenance = Composed(
        base=g.id,
        parts=tuple(None if f is None else f.id for f in fs),
        base_subst=None if g.is_ground else sg,
        part_substs=tuple(
            None if f is None or f.is_ground else subs[i] for i, f in enumerate(fs)
        ),
        simplification=mapping,
    )
    return Rule(new_id, sg.apply(g.conclusion), premises, tuple(major), provenance)


# -- systems -----------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    predicates: frozenset[str]
    symbols: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "predicates", frozenset(self.predicates))
        object.__setattr__(self, "symbols", frozenset(self.symbols))
        for name in self.predicates | self.symbols:
            if not NAME_RE.match(name):
                raise ValueError(f"invalid name {name!r}")
        if not self.predicates:
            raise ValueError("signature needs at least one predicate")
        clash = self.predicates & self.symbols
        if clash:
            raise ValueError(f"names used both as predicate and symbol: {sorted(clash)}")
        if {VARIABLE, EMPTY_WORD} & self.symbols:
            raise ValueError(f"{VARIABLE!r} and {EMPTY_WORD!r} are reserved")

    @classmethod
    def of_rules(cls, rules: Iterable[Rule]) -> Signature:
        preds: set[str] = set()
        syms: set[str] = set()
        for r in rules:
            for p in (r.conclusion, *r.premises):
                preds.add(p.predicate)
                syms.update(p.prefix)
        return cls(frozenset(preds), frozenset(syms))

    def admits(self, a: Atom) -> bool:
        return a.predicate in self.predicates and all(s in self.symbols for s in a.word)

    def merge(self, other: Signature) -> Signature:
        return Signature(self.predicates | other.predicates, self.symbols | other.symbols)


class RuleInstance(NamedTuple):
    rule: Rule
    binding: Binding
    premises: tuple[Atom, ...]

    @property
    def rule_id(self) -> str:
        return self.rule.id


@dataclass(frozen=True)
class System:
    """An ordered, duplicate-free set of rules over a signature.

    Rule order is part of the value: every enumeration follows it.
    """

    rules: tuple[Rule, ...]
    signature: Optional[Signature] = None
    flags: frozenset[str] = frozenset()

    def __post_init__(self):
        rules = tuple(self.rules)
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "flags", frozenset(self.flags))
        inferred = Signature.of_rules(rules) if rules else None
        if self.signature is None:
            if inferred is None:
                raise ValueError("empty system needs an explicit signature")
            object.__setattr__(self, "signature", inferred)
        elif inferred is not None:
            if not (
                inferred.predicates <= self.signature.predicates
                and inferred.symbols <= self.signature.symbols
            ):
                raise ValueError("rules use names outside the signature")
        ids: set[str] = set()
        keys: dict = {}
        for r in rules:
            if r.id in ids:
                raise ValueError(f"duplicate rule id {r.id}")
            ids.add(r.id)
            if r.key in keys:
                raise ValueError(f"rule {r.id} duplicates rule {keys[r.key]}")
            keys[r.key] = r.id
        if "automaton" in self.flags and not all(r.is_intro for r in rules):
            raise ValueError("automaton flag set on a system with non-introduction rules")

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __contains__(self, rule_id: object) -> bool:
        return rule_id in self.by_id

    def __getitem__(self, rule_id: str) -> Rule:
        return self.by_id[rule_id]

    @cached_property
    def by_id(self) -> dict[str, Rule]:
        return {r.id: r for r in self.rules}

    @cached_property
    def by_key(self) -> dict:
        return {r.key: r for r in self.rules}

    @cached_property
    def by_predicate(self) -> dict[str, tuple[Rule, ...]]:
        out: dict[str, list[Rule]] = {}
        for r in self.rules:
            out.setdefault(r.conclusion.predicate, []).append(r)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def selections(self) -> dict:
        """(conclusion, selection map) -> complement rule, for complement systems."""
        out = {}
        for r in self.rules:
            if isinstance(r.provenance, Selection):
                for sel in r.provenance.choices:
                    out[r.conclusion, sel] = r
        return out

    def find(self, rule: Rule) -> Optional[Rule]:
        """The rule of this system structurally equal to ``rule``."""
        return self.by_key.get(rule.key)

    @property
    def is_aps(self) -> bool:
        return all(aps_class(r.conclusion, r.premises) is not None for r in self.rules)

    def with_flags(self, *flags: str) -> System:
        return System(self.rules, self.signature, self.flags | set(flags))


def rule_instances_concluding(s: System, a: Atom) -> list[RuleInstance]:
    out = []
    for r in s.by_predicate.get(a.predicate, ()):
        b = match_pattern(r.conclusion, a)
        if b is None:
            continue
        out.append(RuleInstance(r, b, tuple(instantiate(p, b) for p in r.premises)))
    return out


@dataclass(frozen=True)
class SignedSystem:
    """Rules over proved sequents (``positive``) and refuted ones (``negative``)."""

    positive: System
    negative: System

    def __post_init__(self):
        clash = set(self.positive.by_id) & set(self.negative.by_id)
        if clash:
            raise ValueError(f"rule ids shared by both sides: {sorted(clash)}")

    @property
    def signature(self) -> Signature:
        return self.positive.signature.merge(self.negative.signature)

    def side(self, polarity: Polarity) -> System:
        return self.positive if polarity is Polarity.PROVED else self.negative


# -- proofs ------------------------------------------------------------------


class Polarity(enum.Enum):
    PROVED = "proved"
    REFUTED = "refuted"

    @property
    def turnstile(self) -> str:
        return "|-" if self is Polarity.PROVED else "|/-"


@dataclass(frozen=True)
class Proof:
    """A proof node; unexpanded nodes are frontier leaves of a prefix."""

    atom: Atom
    rule: Optional[str] = None
    binding: Optional[Binding] = None
    children: tuple[Proof, ...] = ()
    polarity: Polarity = Polarity.PROVED
    expanded: bool = True

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    @property
    def sequent(self) -> str:
        return f"{self.polarity.turnstile} {self.atom}"

    def walk(self, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Proof]]:
        """Pre-order (path, node) pairs."""
        stack = [(path, self)]
        while stack:
            p, node = stack.pop()
            yield p, node
            for i in reversed(range(len(node.children))):
                stack.append((p + (i,), node.children[i]))

    def at(self, path: Sequence[int]) -> Proof:
        node = self
        for i in path:
            node = node.children[i]
        return node

    def replace(self, path: Sequence[int], new: Proof) -> Proof:
        if not path:
            return new
        i = path[0]
        kids = list(self.children)
        kids[i] = kids[i].replace(path[1:], new)
        return Proof(self.atom, self.rule, self.binding, tuple(kids), self.polarity, self.expanded)

    @property
    def size(self) -> int:
        return sum(1 for _ in self.walk())

    @property
    def height(self) -> int:
        if not self.children:
            return 1
        return 1 + max(c.height for c in self.children)

    @property
    def complete(self) -> bool:
        return all(node.expanded for _, node in self.walk())

    def truncate(self, depth: int) -> Proof:
        """The prefix of depth ``depth``; cut nodes become unexpanded leaves."""
        if depth <= 0:
            return Proof(self.atom, polarity=self.polarity, expanded=False)
        return Proof(
            self.atom,
            self.rule,
            self.binding,
            tuple(c.truncate(depth - 1) for c in self.children),
            self.polarity,
            self.expanded,
        )


@dataclass(frozen=True)
class CheckReport:
    valid: bool
    path: Optional[tuple[int, ...]] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def check_proof(
    s: Union[System, SignedSystem], pf: Proof, allow_unexpanded: bool = False
) -> CheckReport:
    """Independent re-check of every expanded node of ``pf`` against ``s``.

    For a plain System every node must carry the proved polarity.
    """
    sig = s.signature
    for path, node in pf.walk():
        if not isinstance(node.polarity, Polarity):
            return CheckReport(False, path, "unknown polarity")
        if isinstance(s, SignedSystem):
            side = s.side(node.polarity)
        elif node.polarity is Polarity.PROVED:
            side = s
        else:
            return CheckReport(False, path, "polarity mismatch: refuted sequent in a plain system")
        if not sig.admits(node.atom):
            return CheckReport(False, path, f"signature mismatch: {node.atom}")
        for c in node.children:
            if c.polarity is not node.polarity:
                return CheckReport(False, path, "polarity mismatch between node and child")
        if not node.expanded:
            if not allow_unexpanded:
                return CheckReport(False, path, "unexpanded node in a finite certificate")
            if node.rule is not None or node.children or node.binding is not None:
                return CheckReport(False, path, "unexpanded node carries a rule instance")
            continue
        rule = side.by_id.get(node.rule) if isinstance(node.rule, str) else None
        if rule is None:
            return CheckReport(False, path, f"no such rule: {node.rule!r}")
        b = node.binding
        if rule.is_ground:
            if b is not GROUND:
                return CheckReport(False, path, "ground rule needs the ground binding")
        elif not isinstance(b, tuple) or not all(x in sig.symbols for x in b):
            return CheckReport(False, path, f"bad binding {b!r} for rule {rule.id}")
        try:
            concl, prems = rule.instance(b)
        except RuleError as e:
            return CheckReport(False, path, str(e))
        if concl != node.atom:
            return CheckReport(False, path, f"rule {rule.id} concludes {concl}, not {node.atom}")
        if prems != tuple(c.atom for c in node.children):
            return CheckReport(
                False,
                path,
                f"wrong premises for rule {rule.id}: expected "
                f"{', '.join(map(str, prems)) or 'none'}",
            )
    return CheckReport(True)
