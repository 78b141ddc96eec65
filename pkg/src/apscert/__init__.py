"""Provability, certificates and counter-proofs for alternating pushdown systems."""

from .complement import complement, complementation, conclusion_basis, hat
from .core import (
    GROUND,
    Atom,
    Pattern,
    Polarity,
    Proof,
    Rule,
    RuleClass,
    Signature,
    SignedSystem,
    System,
    check_proof,
    classify_rule,
    compose_rule,
    instantiate,
    match_pattern,
    rule_instances_concluding,
    simplify_rule,
)
from .counterproof import (
    CounterProofPrefix,
    UnfoldContext,
    combinatorial_select,
    select_refutable_premise,
    select_refutable_premise_naive,
    unfold,
)
from .decide import DecisionSession, Verdict, kleene
from .saturation import (
    SaturatedSystem,
    eliminate_cuts,
    extract_automaton,
    find_cut,
    lift_proof,
    rank,
    saturate,
)
from .syntax import format_system, parse_atom, parse_system

__version__ = "0.1.0"
