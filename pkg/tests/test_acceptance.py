"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The random sweeps use
fixed seeds, so every run checks the identical case set.
"""

import json
import random
import time
from pathlib import Path

import pytest
from click.testing import CliRunner

import randgen
import ref_interpreter
from rubric import (
    RetrievalResult,
    effectiveness,
    evaluate_concept,
    eval_expr,
    parse_rulebase,
    recompute_trace,
    serialize,
    tokenize,
    validate,
)
from rubric.cli import cli
from rubric.trl import EvalEnv, ProximityConfig

SEED_ORACLE = 20260808
SEED_BOOLEAN = 31337
SEED_MONOTONE = 424242
SEED_ROUNDTRIP = 515151
SEED_TAXONOMY = 616161

PROX = ProximityConfig()


def _oracle_cases(seed: int, count: int):
    rng = random.Random(seed)
    for _ in range(count):
        src = randgen.random_rulebase_text(rng)
        rb = parse_rulebase(src)
        doc = tokenize("d", randgen.random_document_text(rng))
        yield rb, doc


def _walk(node):
    yield node
    for child in node.children:
        yield from _walk(child)


# ---------------------------------------------------------------------------
# criterion 1: golden corpus


GOLDEN = {
    # hand arithmetic per document (word positions counted by hand):
    # vienna-visit: actors NEAR-W d=5 -> 0.5 (below the 0.6 gate);
    #   location = max over location concepts = vienna 0.2;
    #   meetings attrs mean(0, 0.5, 0, 0.2) = 0.175
    "vienna-visit": {
        "meetings": 0.175, "diplomatic-meetings": 0.175, "sino-soviet-summit": 0.175,
        "white-house-meetings": 0.125, "press-conference": 0.125, "cabinet-meeting": 0.125,
        "us-soviet-summit": 0.0, "salt": 0.0, "moscow": 0.0, "vienna": 0.2,
        "washington": 0.0, "geneva": 0.0, "white-house": 0.0,
    },
    # summit-plan: actors d=3 -> 0.7, action d=7 -> 0.3, location vienna 0.2;
    #   gate open: min(1, 0.7+0.2+0.3) = 1.0; salt = 0.7 * 1.0
    "summit-plan": {
        "meetings": 1.0, "diplomatic-meetings": 1.0, "sino-soviet-summit": 0.3,
        "white-house-meetings": 0.25, "press-conference": 0.25, "cabinet-meeting": 0.25,
        "us-soviet-summit": 1.0, "salt": 0.7, "vienna": 0.2, "moscow": 0.0,
    },
    # kremlin-note: moscow evidence 0.8 * 1; meetings attrs mean(0,0,0,0.8) = 0.2
    "kremlin-note": {
        "meetings": 0.2, "diplomatic-meetings": 0.2, "sino-soviet-summit": 0.2,
        "white-house-meetings": 0.0, "us-soviet-summit": 0.0, "salt": 0.0, "moscow": 0.8,
    },
    # press-room: white-house phrase 0.9; the location override carries the
    #   white-house branch: mean(0,0,0,0.9) = 0.225; global location stays 0
    "press-room": {
        "meetings": 0.225, "white-house-meetings": 0.225, "press-conference": 0.225,
        "cabinet-meeting": 0.225, "diplomatic-meetings": 0.0, "us-soviet-summit": 0.0,
        "salt": 0.0, "white-house": 0.9, "moscow": 0.0,
    },
    # geneva-accord: actors d=2 -> 0.8, action d=3 -> 0.7, geneva 0.6;
    #   gate open: min(1, 0.8+0.6+0.7) = 1.0; sino mean(0.7,0.8,0,0.6) = 0.525
    "geneva-accord": {
        "meetings": 1.0, "diplomatic-meetings": 1.0, "sino-soviet-summit": 0.525,
        "white-house-meetings": 0.375, "press-conference": 0.375, "cabinet-meeting": 0.375,
        "us-soviet-summit": 1.0, "salt": 0.7, "geneva": 0.6, "moscow": 0.0,
    },
    # budget-memo: nothing matches anywhere
    "budget-memo": {
        "meetings": 0.0, "diplomatic-meetings": 0.0, "us-soviet-summit": 0.0,
        "salt": 0.0, "moscow": 0.0, "white-house-meetings": 0.0,
    },
}


def _attribute_values(trace):
    for cat in trace.root.children:
        if cat.note == "attributes":
            return {a.subject: a.value for a in cat.children}
    return {}


def test_golden_scores(meetings_rb, demo_corpus, demo_doc):
    started = time.perf_counter()
    assert validate(meetings_rb).errors == ()

    for doc_id, expected in GOLDEN.items():
        doc = demo_doc(doc_id)
        for concept, want in expected.items():
            got, _ = evaluate_concept(concept, doc, meetings_rb)
            assert abs(got - want) <= 1e-9, (doc_id, concept, got, want)

    # gate case 1: v(actors) = 0.5 < 0.6 forces the summit concept to 0
    v1, trace1 = evaluate_concept("us-soviet-summit", demo_doc("vienna-visit"), meetings_rb)
    attrs1 = _attribute_values(trace1)
    assert abs(attrs1["actors"] - 0.5) <= 1e-9
    assert v1 == 0.0

    # gate case 2: 0.7 / 0.2 / 0.3 saturates: min(1, 1.2) = 1.0
    v2, trace2 = evaluate_concept("us-soviet-summit", demo_doc("summit-plan"), meetings_rb)
    attrs2 = _attribute_values(trace2)
    assert abs(attrs2["actors"] - 0.7) <= 1e-9
    assert abs(attrs2["location"] - 0.2) <= 1e-9
    assert abs(attrs2["action"] - 0.3) <= 1e-9
    assert v2 == 1.0

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"golden run took {elapsed:.2f}s"
    print(f"ACCEPTANCE PASS: golden corpus scores ({sum(len(v) for v in GOLDEN.values())} scores, "
          f"{elapsed:.2f}s)")


def test_oracle_equivalence():
    started = time.perf_counter()
    checked = 0
    for rb, doc in _oracle_cases(SEED_ORACLE, 1000):
        assert validate(rb).errors == ()
        for concept in sorted(rb.concepts):
            engine, _ = evaluate_concept(concept, doc, rb, proximity=PROX)
            naive = ref_interpreter.concept_value(concept, rb, doc, PROX)
            assert engine == naive, (serialize(rb), doc.raw, concept)
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"oracle sweep took {elapsed:.2f}s"
    print(f"ACCEPTANCE PASS: oracle equivalence (1000 cases, {checked} concept values, "
          f"{elapsed:.2f}s)")


def test_boolean_subset_equivalence():
    started = time.perf_counter()
    rng = random.Random(SEED_BOOLEAN)
    for _ in range(500):
        expr = randgen.random_crisp_expr(rng)
        doc = tokenize("d", randgen.random_document_text(rng))
        value = eval_expr(expr, EvalEnv(doc, lambda name: 0.0, PROX))
        assert value in (0.0, 1.0)
        assert (value == 1.0) == ref_interpreter.crisp_eval(expr, doc)
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"boolean sweep took {elapsed:.2f}s"
    print(f"ACCEPTANCE PASS: boolean-subset equivalence (500 cases, {elapsed:.2f}s)")


def _monotone_cases(seed: int, count: int):
    rng = random.Random(seed)
    produced = 0
    while produced < count:
        src = randgen.random_rulebase_text(rng, monotone=True)
        rb = parse_rulebase(src)
        weighted = [r for r in rb.rules if hasattr(r, "weight")]
        if not weighted:
            continue
        doc = tokenize("d", randgen.random_document_text(rng))
        rule = rng.choice(weighted)
        w1, w2 = sorted((rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)))
        produced += 1
        yield rb, doc, rule.id, w1, w2


def test_weight_monotonicity():
    from rubric import with_weight

    started = time.perf_counter()
    for rb, doc, rule_id, w1, w2 in _monotone_cases(SEED_MONOTONE, 500):
        rb1 = with_weight(rb, rule_id, w1)
        rb2 = with_weight(rb, rule_id, w2)
        for concept in sorted(rb.concepts):
            low, _ = evaluate_concept(concept, doc, rb1, proximity=PROX)
            high, _ = evaluate_concept(concept, doc, rb2, proximity=PROX)
            assert 0.0 <= low <= 1.0 and 0.0 <= high <= 1.0
            assert high >= low, (serialize(rb), concept, rule_id, w1, w2, low, high)
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"monotonicity sweep took {elapsed:.2f}s"
    print(f"ACCEPTANCE PASS: weight monotonicity (500 cases, {elapsed:.2f}s)")


def test_range_and_trace_consistency():
    started = time.perf_counter()
    nodes = 0
    for rb, doc in _oracle_cases(SEED_ORACLE, 1000):
        for concept in sorted(rb.concepts):
            value, trace = evaluate_concept(concept, doc, rb, proximity=PROX)
            assert 0.0 <= value <= 1.0
            for node in _walk(trace.root):
                nodes += 1
                assert 0.0 <= node.value <= 1.0, (serialize(rb), concept, node)
            assert recompute_trace(trace.root) == value, (serialize(rb), concept)
    rng = random.Random(SEED_BOOLEAN)
    for _ in range(500):
        expr = randgen.random_crisp_expr(rng)
        doc = tokenize("d", randgen.random_document_text(rng))
        assert 0.0 <= eval_expr(expr, EvalEnv(doc, lambda name: 0.0, PROX)) <= 1.0
    elapsed = time.perf_counter() - started
    print(f"ACCEPTANCE PASS: range and trace consistency ({nodes} trace nodes, {elapsed:.2f}s)")


def test_taxonomy_dominance():
    started = time.perf_counter()
    rng = random.Random(SEED_TAXONOMY)
    edges = 0
    for _ in range(200):
        src = randgen.random_taxonomy_rulebase_text(rng)
        rb = parse_rulebase(src)
        assert validate(rb).errors == ()
        doc = tokenize("d", randgen.random_document_text(rng))
        for r in rb.rules:
            if not hasattr(r, "parent"):
                continue
            child = r.child if hasattr(r, "child") else r.member
            vp, _ = evaluate_concept(r.parent, doc, rb)
            vc, _ = evaluate_concept(child, doc, rb)
            assert vp >= vc, (src, r)
            edges += 1
    elapsed = time.perf_counter() - started
    print(f"ACCEPTANCE PASS: taxonomy dominance ({edges} edges, {elapsed:.2f}s)")


def test_effectiveness_arithmetic():
    result = RetrievalResult("c", tuple((d, 0.5) for d in ("a", "b", "c", "d")), 0.0)
    eff = effectiveness(result, {"a", "b", "x"})
    assert f"{eff.precision:.6f}" == "0.500000"
    assert f"{eff.recall:.6f}" == "0.666667"
    assert abs(eff.recall - 2 / 3) <= 1e-9

    same = RetrievalResult("c", (("a", 0.5), ("b", 0.4)), 0.0)
    eff_same = effectiveness(same, {"a", "b"})
    assert eff_same.recall == 1.0 and eff_same.precision == 1.0

    empty_judged = effectiveness(same, set())
    assert empty_judged.recall == 1.0
    empty_retrieved = effectiveness(RetrievalResult("c", (), 0.0), {"a"})
    assert empty_retrieved.precision == 1.0
    print("ACCEPTANCE PASS: effectiveness arithmetic")


def test_dsl_round_trip(meetings_rb):
    canon = serialize(meetings_rb)
    assert parse_rulebase(canon) == meetings_rb
    assert serialize(parse_rulebase(canon)) == canon

    rng = random.Random(SEED_ROUNDTRIP)
    for _ in range(200):
        src = randgen.random_rulebase_text(rng)
        rb = parse_rulebase(src)
        canon = serialize(rb)
        rb2 = parse_rulebase(canon)
        assert rb2 == rb, src
        assert serialize(rb2) == canon, src
    print("ACCEPTANCE PASS: DSL round-trip (meetings rule base + 200 random)")


def test_query_determinism(monkeypatch, meetings_rules_path, demo_docs_dir):
    import itertools

    runner = CliRunner()
    real_iterdir = Path.iterdir
    seeds = itertools.cycle([97, 53])

    def shuffled_iterdir(self):
        entries = list(real_iterdir(self))
        random.Random(next(seeds)).shuffle(entries)
        return iter(entries)

    monkeypatch.setattr(Path, "iterdir", shuffled_iterdir)
    args = ["query", str(meetings_rules_path), str(demo_docs_dir), "meetings"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == second.exit_code == 0
    assert first.stdout_bytes == second.stdout_bytes
    assert first.output.splitlines()[0] == "geneva-accord\t1.000000"

    json_args = args + ["--json"]
    tsv_pairs = [(l.split("\t")[0], float(l.split("\t")[1])) for l in first.output.splitlines()]
    json_pairs = [(e["doc"], e["score"]) for e in json.loads(runner.invoke(cli, json_args).output)]
    assert tsv_pairs == json_pairs
    print("ACCEPTANCE PASS: query determinism under shuffled enumeration")
