import random

import pytest

import randgen
from rubric import (
    RetrievalResult,
    UnknownConceptError,
    UnknownRuleError,
    effectiveness,
    load_judgments,
    make_corpus,
    parse_rulebase,
    query,
    sensitivity,
    tokenize,
    validate,
)


def corpus_of(**texts):
    return make_corpus(tokenize(doc_id, text) for doc_id, text in texts.items())


SIMPLE_RULES = '(EVIDENCE topic ("ALPHA" 0.5))\n(EVIDENCE topic ("BETA" 0.9))'


class TestQuery:
    def test_strict_threshold_drops_zero_scores(self):
        corpus = corpus_of(d1="alpha", d2="beta", d3="nothing", d4="", d5="other words")
        rb = parse_rulebase(SIMPLE_RULES)
        result = query("topic", corpus, rb, threshold=0.0)
        assert [d for d, _ in result.entries] == ["d2", "d1"]

    def test_tie_broken_by_doc_id(self):
        corpus = corpus_of(zz="alpha", aa="alpha")
        rb = parse_rulebase(SIMPLE_RULES)
        result = query("topic", corpus, rb)
        assert [d for d, _ in result.entries] == ["aa", "zz"]
        assert result.entries[0][1] == result.entries[1][1] == 0.5

    def test_threshold_one_empty(self):
        corpus = corpus_of(d1="beta")
        rb = parse_rulebase('(EVIDENCE topic ("BETA" 1))')
        assert query("topic", corpus, rb, threshold=1.0).entries == ()

    def test_threshold_filters_strictly(self):
        corpus = corpus_of(d1="alpha", d2="beta")
        rb = parse_rulebase(SIMPLE_RULES)
        result = query("topic", corpus, rb, threshold=0.5)
        assert [d for d, _ in result.entries] == ["d2"]

    def test_unknown_concept(self):
        with pytest.raises(UnknownConceptError, match="nonesuch"):
            query("nonesuch", corpus_of(d="x"), parse_rulebase(SIMPLE_RULES))

    def test_higher_threshold_is_prefix_subset(self):
        rng = random.Random(11)
        src = randgen.random_rulebase_text(rng)
        rb = parse_rulebase(src)
        corpus = corpus_of(**{f"d{i}": randgen.random_document_text(rng) for i in range(8)})
        concept = sorted(rb.concepts)[0]
        low = query(concept, corpus, rb, threshold=0.1)
        high = query(concept, corpus, rb, threshold=0.6)
        assert set(high.entries) <= set(low.entries)
        assert list(high.entries) == [e for e in low.entries if e[1] > 0.6]

    def test_load_order_independent(self, meetings_rb, demo_corpus):
        docs = list(demo_corpus.documents)
        shuffled = make_corpus(reversed(docs))
        a = query("meetings", demo_corpus, meetings_rb)
        b = query("meetings", shuffled, meetings_rb)
        assert a == b

    def test_demo_ranking(self, meetings_rb, demo_corpus):
        result = query("meetings", demo_corpus, meetings_rb)
        assert [d for d, _ in result.entries] == [
            "geneva-accord", "summit-plan", "press-room", "kremlin-note", "vienna-visit",
        ]


class TestEffectiveness:
    def _result(self, ids):
        return RetrievalResult("c", tuple((d, 0.5) for d in ids), 0.0)

    def test_worked_case(self):
        eff = effectiveness(self._result(["a", "b", "c", "d"]), {"a", "b", "x"})
        assert eff.precision == pytest.approx(0.5)
        assert eff.recall == pytest.approx(2 / 3)
        assert (eff.retrieved, eff.relevant, eff.intersection) == (4, 3, 2)

    def test_perfect_retrieval(self):
        eff = effectiveness(self._result(["a", "b"]), {"a", "b"})
        assert eff.recall == 1.0 and eff.precision == 1.0

    def test_empty_judgments_vacuous_recall(self):
        eff = effectiveness(self._result(["a"]), set())
        assert eff.recall == 1.0
        assert eff.precision == 0.0

    def test_empty_retrieval_vacuous_precision(self):
        eff = effectiveness(self._result([]), {"a"})
        assert eff.precision == 1.0
        assert eff.recall == 0.0

    def test_judgments_outside_corpus_depress_recall(self):
        eff = effectiveness(self._result(["a"]), {"a", "phantom"})
        assert eff.recall == pytest.approx(0.5)

    def test_metrics_bounded_and_monotone(self):
        base = effectiveness(self._result(["a", "b"]), {"a", "c"})
        more = effectiveness(self._result(["a", "b", "c"]), {"a", "c"})
        assert 0.0 <= base.recall <= 1.0 and 0.0 <= base.precision <= 1.0
        assert more.recall >= base.recall


class TestJudgments:
    def test_loader(self, tmp_path):
        p = tmp_path / "rel.txt"
        p.write_text("# comment\nalpha\n\nbeta # closing remark\n", encoding="utf-8")
        assert load_judgments(p) == {"alpha", "beta"}

    def test_demo_judgments(self, meetings_rb, demo_corpus):
        from conftest import DEMO_DIR

        judged = load_judgments(DEMO_DIR / "relevant-salt.txt")
        result = query("salt", demo_corpus, meetings_rb)
        eff = effectiveness(result, judged)
        assert eff.recall == 1.0 and eff.precision == 1.0


class TestSensitivity:
    CORPUS = {
        "d1": "alpha words here",
        "d2": "beta words here",
        "d3": "alpha beta together",
        "d4": "unrelated text",
    }

    def _run(self, rule_id, grid, **kwargs):
        rb = parse_rulebase(SIMPLE_RULES)
        return sensitivity(rule_id, grid, "topic", corpus_of(**self.CORPUS), rb, **kwargs)

    def test_original_weight_zero_inversions(self):
        report = self._run(0, [0.25, 0.5, 0.75])
        by_weight = {p.weight: p for p in report.points}
        assert by_weight[0.5].inversions == 0
        assert by_weight[0.5].entries == report.baseline

    def test_zero_weight_zeroes_sole_evidence(self):
        rb = parse_rulebase('(EVIDENCE topic ("ALPHA" 0.5))')
        report = sensitivity(0, [0.0, 0.5], "topic", corpus_of(**self.CORPUS), rb)
        zero_point = report.points[0]
        assert zero_point.weight == 0.0
        assert zero_point.entries == ()  # every score drops to 0, below threshold

    def test_scores_monotone_along_grid(self):
        rng = random.Random(21)
        checked = 0
        while checked < 10:
            src = randgen.random_rulebase_text(rng, monotone=True)
            rb = parse_rulebase(src)
            weighted = [r for r in rb.rules if hasattr(r, "weight")]
            if not weighted or validate(rb).errors:
                continue
            corpus = corpus_of(**{f"d{i}": randgen.random_document_text(rng) for i in range(5)})
            rule = rng.choice(weighted)
            concept = rng.choice(sorted(rb.concepts))
            report = sensitivity(rule.id, [0.0, 0.3, 0.7, 1.0], concept, corpus, rb)
            per_doc: dict[str, list[float]] = {}
            for point in report.points:
                scores = dict(point.entries)
                for doc_id in corpus.doc_ids:
                    per_doc.setdefault(doc_id, []).append(scores.get(doc_id, 0.0))
            for series in per_doc.values():
                assert series == sorted(series)
            checked += 1

    def test_rejects_unweighted_rule(self):
        rb = parse_rulebase("(SUBSET a b)")
        with pytest.raises(UnknownRuleError, match="carries no weight"):
            sensitivity(0, [0.5], "a", corpus_of(d="x"), rb)

    def test_rejects_missing_rule(self):
        with pytest.raises(UnknownRuleError, match="no rule with id"):
            self._run(99, [0.5])

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            self._run(0, [0.5, 0.5])
        with pytest.raises(ValueError, match="nonempty"):
            self._run(0, [])

    def test_top_limits_entries(self):
        report = self._run(0, [0.5], top=1)
        assert len(report.points[0].entries) == 1
        assert len(report.baseline) == 1

    def test_original_rulebase_untouched(self):
        rb = parse_rulebase(SIMPLE_RULES)
        before = rb.rules
        sensitivity(0, [0.0, 1.0], "topic", corpus_of(**self.CORPUS), rb)
        assert rb.rules == before

    def test_inversion_count_counts_swaps(self):
        # d1 scores 0.5 via rule 0, d2 scores 0.9 via rule 1; sweeping rule 0
        # to 1.0 swaps their order relative to the baseline
        report = self._run(0, [1.0])
        point = report.points[0]
        assert point.entries[0][0] == "d1" or point.entries[0][0] == "d3"
        assert point.inversions >= 1
