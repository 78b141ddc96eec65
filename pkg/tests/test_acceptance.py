"""Acceptance criteria 1-10, each with its time limit.

Every criterion prints one line ``criterion N: PASS|FAIL (...)``; the lines
are repeated in the terminal summary.
"""

import itertools
import random
import time
from contextlib import contextmanager

import pytest

import golden
from apscert import (
    Atom,
    DecisionSession,
    UnfoldContext,
    Verdict,
    check_proof,
    complement,
    complementation,
    eliminate_cuts,
    extract_automaton,
    find_cut,
    hat,
    kleene,
    lift_proof,
    parse_system,
    rank,
    rule_instances_concluding,
    saturate,
    select_refutable_premise,
    select_refutable_premise_naive,
    unfold,
)
from apscert.certificate import dumps, verify_document
from apscert.cli import candidate_systems
from apscert.core import Pattern, Polarity, Rule
from apscert.counterproof import _base_instance, _binding
from apscert.complement import positive_group
from apscert.decide import DecisionError, atoms_upto, suffix_universe
from gen import forward_proofs, random_aps, random_atom
from mutate import mutations

RESULTS: dict[int, str] = {}


@contextmanager
def criterion(n: int, limit: float, detail: str = ""):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        in_time = elapsed < limit
        status = "PASS" if ok and in_time else "FAIL"
        line = f"criterion {n}: {status} ({elapsed:.2f}s, limit {limit:g}s){' ' + detail if detail else ''}"
        RESULTS[n] = line
        print(line)
    assert in_time, f"criterion {n} took {elapsed:.2f}s, limit {limit}s"


def keys(s):
    return {r.key for r in s}


def A(pred, word=""):
    return Atom(pred, tuple(word))


def test_criterion_1_golden_saturation():
    with criterion(1, 1.0):
        s = parse_system(golden.EXAMPLE1)
        ss = saturate(s)
        assert keys(ss.rules) - keys(s) == keys(parse_system(golden.SATURATION_ADDED))
        assert len(ss.rules) == len(s) + 4


def test_criterion_2_golden_automaton():
    with criterion(2, 1.0):
        a = extract_automaton(saturate(parse_system(golden.EXAMPLE1)))
        assert len(a) == 6
        assert keys(a) == keys(parse_system(golden.AUTOMATON))


def test_criterion_3_golden_complement():
    with criterion(3, 1.0):
        a = extract_automaton(saturate(parse_system(golden.EXAMPLE1)))
        b = complement(hat(a))
        fixture = parse_system(golden.AUTOMATON_COMPLEMENT, aps=False)
        assert len(fixture) == 12 and len(b) == 15
        assert keys(b) == keys(hat(fixture))


def test_criterion_4_golden_certificate():
    with criterion(4, 1.0):
        ctx = UnfoldContext.from_system(parse_system(golden.EXAMPLE1))
        pf = ctx.session.refute(A("P", "a"))
        leaves = [n.atom for _, n in pf.walk() if not n.children]
        assert sorted(leaves) == [A("U"), A("V")]
        assert len(pf.children) == 2
        text = dumps(pf, ctx.a_b)
        assert verify_document(text, candidate_systems(ctx))


def test_criterion_5_completeness_dichotomy():
    with criterion(5, 5.0):
        s = parse_system(golden.EXAMPLE1)
        sess = DecisionSession(extract_automaton(saturate(s)))
        atoms = atoms_upto(s.signature, 5)
        assert len(atoms) == 42
        for a in atoms:
            got = []
            for f in (sess.prove, sess.refute):
                try:
                    got.append(f(a))
                except DecisionError:
                    pass
            assert len(got) == 1, a
            pf = got[0]
            system = sess.automaton if pf.polarity is Polarity.PROVED else sess.signed
            assert check_proof(system, pf)
        u = suffix_universe(s.signature, [("a",) * 5])
        oracle = kleene(s, u)
        assert oracle.stabilized
        for a in u:
            assert (sess.decide(a) is Verdict.PROVABLE) == (a in oracle.atoms)


def test_criterion_6_counterproof_unfolding():
    with criterion(6, 5.0):
        ctx = UnfoldContext.from_system(parse_system(golden.EXAMPLE1))
        pf = unfold(ctx, A("P", "a"), 8).proof
        # (a) local validity
        assert check_proof(ctx.i_j, pf, allow_unexpanded=True)
        # (b) root rule: the instance of |/-P(x) <- |/-Q(x), |/-S(x) at P(a)
        root = ctx.i_j.negative[pf.rule]
        assert root.key == Rule("", Pattern("P", ("a",)), (Pattern("Q", ("a",)), Pattern("S", ("a",)))).key
        # (c) periodic spine P(a^n) -> Q(a^n) -> P(a^(n+1))
        node, n = pf, 1
        while node.expanded:
            assert node.atom == A("P", "a" * n)
            q = next(c for c in node.children if c.atom.predicate == "Q")
            if not q.expanded:
                break
            assert q.atom == A("Q", "a" * n)
            node = next(c for c in q.children if c.atom.predicate == "P")
            n += 1
        assert n >= 4
        # (d) both selectors return refutable premises at every expanded node
        for _, node in pf.walk():
            if not node.expanded:
                continue
            for r in positive_group(ctx.i_j.positive, node.atom):
                base_id, b = _base_instance(r, _binding(r, node.atom))
                for select in (select_refutable_premise, select_refutable_premise_naive):
                    sel = select(ctx, base_id, b, node.atom)
                    assert ctx.session.decide(sel.premise) is Verdict.REFUTABLE


def test_criterion_7_rank_fixture():
    with criterion(7, 1.0):
        ss = saturate(parse_system(golden.EXAMPLE1))
        neutral = next(r for r in ss.rules if str(r) == "P(x) <- Q(x), R(x).")
        assert rank(ss, neutral.id) == 1
        assert all(rank(ss, r.id) == 0 for r in ss.rules if r.is_intro)
        for r in ss.rules:
            if not r.is_intro:
                for _, member in ss.derived(r):
                    assert rank(ss, member.id) < rank(ss, r.id)


def test_criterion_8_cut_elimination():
    rng = random.Random(8)
    stats = {"proofs": 0, "with_cuts": 0, "lifted": 0}
    with criterion(8, 30.0, detail=str(stats)):
        while stats["proofs"] < 200 or stats["lifted"] < 200:
            s = random_aps(rng, max_preds=6, max_syms=2, max_rules=10)
            ss = saturate(s)
            if stats["proofs"] < 200:
                for pf in forward_proofs(rng, ss.rules, max_depth=6)[:20]:
                    if pf.height < 2 or stats["proofs"] >= 200:
                        continue
                    assert check_proof(ss.rules, pf)
                    stats["with_cuts"] += find_cut(ss.rules, pf) is not None
                    out = eliminate_cuts(ss, pf)
                    assert find_cut(ss.rules, out) is None
                    assert check_proof(ss.rules, out)
                    assert out.atom == pf.atom and out.polarity is pf.polarity
                    stats["proofs"] += 1
            if stats["lifted"] < 200:
                a = extract_automaton(ss)
                for pf in forward_proofs(rng, a, max_depth=6)[:20]:
                    if stats["lifted"] >= 200:
                        break
                    lifted = lift_proof(ss, pf)
                    assert check_proof(s, lifted) and lifted.atom == pf.atom
                    stats["lifted"] += 1
        assert stats["with_cuts"] > 0
    RESULTS[8] = RESULTS[8].rsplit("{", 1)[0] + str(stats)


def test_criterion_9_fuzzed_complement():
    rng = random.Random(9)
    with criterion(9, 30.0):
        for _ in range(50):
            s = random_aps(rng)
            neg = complementation(s).negative
            for _ in range(100):
                a = random_atom(rng, s.signature, 4)
                got = {frozenset(i.premises) for i in rule_instances_concluding(neg, a)}
                groups = [i.premises for i in rule_instances_concluding(s, a)]
                want = {frozenset(c) for c in itertools.product(*groups)}
                assert got == want, a


def test_criterion_10_certificate_robustness():
    s = parse_system(golden.EXAMPLE1)
    ctx = UnfoldContext.from_system(s)
    ss = ctx.saturated
    goldens = [
        dumps(ctx.session.refute(A("P", "a")), ctx.a_b),
        dumps(ctx.session.prove(A("R", "aa")), ctx.automaton),
        dumps(lift_proof(ss, ctx.session.prove(A("R", "aa"))), s),
        dumps(unfold(ctx, A("P", "a"), 4).proof, ctx.i_j),
    ]
    candidates = candidate_systems(ctx)
    ids = set(ctx.a_b.positive.by_id) | set(ctx.a_b.negative.by_id) | set(ctx.i_j.negative.by_id) | set(s.by_id)
    for g in goldens:
        assert verify_document(g, candidates)
    rng = random.Random(10)
    streams = [mutations(g, rng, sorted(s.signature.predicates), sorted(ids)) for g in goldens]
    with criterion(10, 10.0):
        for k in range(500):
            field, text = next(streams[k % len(streams)])
            report = verify_document(text, candidates)
            assert not report, (field, text)
