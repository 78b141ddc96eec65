import itertools
import random

import pytest

import golden
from apscert import (
    Atom,
    Proof,
    check_proof,
    compose_rule,
    eliminate_cuts,
    extract_automaton,
    find_cut,
    lift_proof,
    parse_system,
    rank,
    saturate,
)
from apscert.core import ComposeError, Pattern, Rule, Signature, System
from apscert.saturation import SaturationError
from conftest import keys
from gen import forward_proofs, random_aps


def naive_closure(s: System) -> set:
    """Oracle: recompute all compositions of the whole rule set until nothing changes."""
    rules = {r.key: r for r in s}
    changed = True
    while changed:
        changed = False
        current = list(rules.values())
        intros = [r for r in current if r.is_intro]
        for g in current:
            if g.is_intro or not g.major:
                continue
            for choice in itertools.product(intros, repeat=len(g.major)):
                parts = [None] * len(g.premises)
                for i, f in zip(g.major, choice):
                    parts[i] = f
                try:
                    c = compose_rule(g, parts)
                except ComposeError:
                    continue
                if c.key not in rules:
                    rules[c.key] = c
                    changed = True
    return set(rules)


def test_example_saturation_adds_exactly_four_rules(example1):
    ss = saturate(example1)
    added = keys(ss.rules) - keys(example1)
    assert added == keys(parse_system(golden.SATURATION_ADDED))
    assert len(ss.rules) == len(example1) + 4


def test_added_rules_have_fresh_ids_and_provenance(example1):
    ss = saturate(example1)
    new = [r for r in ss.rules if r.id not in example1]
    assert [r.id for r in new] == ["s1", "s2", "s3", "s4"]
    for r in new:
        assert r.provenance.base in ss.rules


def test_example_automaton(example1):
    a = extract_automaton(saturate(example1))
    assert keys(a) == keys(parse_system(golden.AUTOMATON))
    assert "automaton" in a.flags


def test_intro_only_system_is_unchanged():
    s = parse_system(golden.AUTOMATON)
    assert keys(saturate(s).rules) == keys(s)


def test_synthetic_elimination_system():
    s = parse_system("B(x) <- A(a x). A(a x) <- C(x). C(x).")
    ss = saturate(s)
    assert keys(ss.rules) == naive_closure(s)
    assert Rule("", Pattern("B"), (Pattern("C"),)).key in keys(ss.rules)


def test_saturation_matches_naive_closure_on_random_systems():
    rng = random.Random(2024)
    for _ in range(150):
        s = random_aps(rng, max_preds=4, max_rules=7)
        ss = saturate(s)
        assert keys(ss.rules) == naive_closure(s)
        assert ss.rules.is_aps


def test_saturation_rejects_non_aps():
    s = parse_system("P(a a x) <- Q(x).", aps=False)
    with pytest.raises(SaturationError):
        saturate(s)


def test_saturation_limit():
    s = parse_system(golden.EXAMPLE1)
    with pytest.raises(SaturationError):
        saturate(s, limit=8)


def test_empty_rule_composition_yields_ground_rules():
    s = parse_system("P(x) <- Q(x). Q(eps).")
    ss = saturate(s)
    assert Rule("", Pattern("P", (), False)).key in keys(ss.rules)


# -- rank -------------------------------------------------------------------


def test_example_ranks(example1):
    ss = saturate(example1)
    assert rank(ss, "r5") == 1
    assert rank(ss, "r7") == 2
    for r in ss.rules:
        if r.is_intro:
            assert rank(ss, r.id) == 0


def _rank_decreases(ss):
    for r in ss.rules:
        if r.is_intro:
            continue
        for _, member in ss.derived(r):
            assert ss.rank_table[member.id] < ss.rank_table[r.id]


def test_rank_decreases_along_compositions(example1):
    _rank_decreases(saturate(example1))


def test_rank_decreases_on_random_systems():
    rng = random.Random(5)
    for _ in range(100):
        _rank_decreases(saturate(random_aps(rng)))


# -- cuts -------------------------------------------------------------------


def test_find_and_eliminate_cut(example1):
    s = parse_system(golden.EXAMPLE1 + "U(x).")
    ss = saturate(s)
    u = Proof(Atom("U"), "r8", ())
    t = Proof(Atom("T"), "r4", ())
    q = Proof(Atom("Q", ("a",)), "r1", (), (u,))
    r = Proof(Atom("R", ("a",)), "r3", (), (t,))
    pf = Proof(Atom("P", ("a",)), "r5", ("a",), (q, r))
    assert check_proof(ss.rules, pf)
    assert find_cut(ss.rules, pf) == ()
    out = eliminate_cuts(ss, pf)
    assert find_cut(ss.rules, out) is None
    assert check_proof(ss.rules, out)
    assert out.atom == pf.atom
    assert ss.rules[out.rule].key == Rule("", Pattern("P", ("a",)), (Pattern("U"), Pattern("T"))).key


def test_nested_cuts_are_eliminated(example1):
    s = parse_system(golden.EXAMPLE1 + "U(x).")
    ss = saturate(s)
    u = Proof(Atom("U", ("a",)), "r8", ("a",))
    t = Proof(Atom("T", ("a",)), "r4", ("a",))
    q = Proof(Atom("Q", ("a", "a")), "r1", ("a",), (u,))
    r = Proof(Atom("R", ("a", "a")), "r3", ("a",), (t,))
    p = Proof(Atom("P", ("a", "a")), "r5", ("a", "a"), (q, r))
    top = Proof(Atom("Q", ("a",)), "r7", ("a",), (p,))
    assert check_proof(ss.rules, top)
    out = eliminate_cuts(ss, top)
    assert find_cut(ss.rules, out) is None and check_proof(ss.rules, out)
    assert ss.rules[out.rule].is_intro
    lifted = lift_proof(ss, out)
    assert check_proof(s, lifted) and lifted.atom == top.atom


def test_lift_example_proof(example1):
    s = parse_system(golden.EXAMPLE1 + "U(x).")
    ss = saturate(s)
    a = extract_automaton(ss)
    from apscert import DecisionSession

    pf = DecisionSession(a).prove(Atom("P", ("a", "a")))
    lifted = lift_proof(ss, pf)
    assert check_proof(s, lifted)
    assert lifted.atom == Atom("P", ("a", "a"))


def _cut_elimination_property(seed: int, n_systems: int) -> int:
    rng = random.Random(seed)
    count = 0
    for _ in range(n_systems):
        s = random_aps(rng)
        ss = saturate(s)
        for pf in forward_proofs(rng, ss.rules, rounds=150):
            assert check_proof(ss.rules, pf)
            out = eliminate_cuts(ss, pf)
            assert find_cut(ss.rules, out) is None
            assert check_proof(ss.rules, out)
            assert out.atom == pf.atom
            assert check_proof(s, lift_proof(ss, out))
            count += 1
    return count


def test_cut_elimination_on_random_proofs():
    assert _cut_elimination_property(99, 30) > 100


def test_lift_random_automaton_proofs():
    rng = random.Random(17)
    n = 0
    for _ in range(40):
        s = random_aps(rng)
        ss = saturate(s)
        a = extract_automaton(ss)
        for pf in forward_proofs(rng, a, rounds=100):
            lifted = lift_proof(ss, pf)
            assert check_proof(s, lifted), lifted
            assert lifted.atom == pf.atom
            n += 1
    assert n > 100
