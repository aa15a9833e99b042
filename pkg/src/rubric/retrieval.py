"""Corpus-level querying, recall/precision effectiveness, and
weight-sensitivity sweeps."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus
from .errors import UnknownConceptError, UnknownRuleError
from .inference import CombinerRegistry, evaluate_concept
from .rulebase import EvidenceRule, ImpliesRule, RuleBase, with_weight
from .trl import ProximityConfig

Entry = tuple[str, float]


@dataclass(frozen=True)
class RetrievalResult:
    """Ranked entries with score strictly above the threshold, sorted by
    score descending then doc_id ascending."""

    concept: str
    entries: tuple[Entry, ...]
    threshold: float


@dataclass(frozen=True)
class Effectiveness:
    recall: float
    precision: float
    retrieved: int
    relevant: int
    intersection: int


@dataclass(frozen=True)
class SensitivityPoint:
    weight: float
    entries: tuple[Entry, ...]
    inversions: int


@dataclass(frozen=True)
class SensitivityReport:
    rule_id: int
    grid: tuple[float, ...]
    baseline: tuple[Entry, ...]
    points: tuple[SensitivityPoint, ...]


def _scores(
    concept: str,
    corpus: Corpus,
    rb: RuleBase,
    registry: CombinerRegistry | None,
    proximity: ProximityConfig | None,
) -> dict[str, float]:
    return {
        doc.doc_id: evaluate_concept(concept, doc, rb, registry, proximity)[0]
        for doc in corpus
    }


def _ranked(scores: dict[str, float], threshold: float) -> tuple[Entry, ...]:
    kept = [(d, s) for d, s in scores.items() if s > threshold]
    kept.sort(key=lambda e: (-e[1], e[0]))
    return tuple(kept)


def query(
    concept: str,
    corpus: Corpus,
    rb: RuleBase,
    registry: CombinerRegistry | None = None,
    proximity: ProximityConfig | None = None,
    threshold: float = 0.0,
) -> RetrievalResult:
    """Score ``concept`` over every document; keep scores strictly above
    ``threshold``.  Requires a rule base that validates without errors."""
    if concept not in rb.concepts:
        raise UnknownConceptError(f"unknown concept '{concept}'")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0,1]")
    scores = _scores(concept, corpus, rb, registry, proximity)
    return RetrievalResult(concept, _ranked(scores, threshold), threshold)


def effectiveness(result: RetrievalResult, judgments: set[str]) -> Effectiveness:
    """Recall and precision of the retrieved set against judged-relevant ids.

    Vacuous conventions: recall is 1.0 when nothing is judged relevant,
    precision is 1.0 when nothing was retrieved.
    """
    retrieved = {d for d, _ in result.entries}
    inter = len(retrieved & judgments)
    recall = inter / len(judgments) if judgments else 1.0
    precision = inter / len(retrieved) if retrieved else 1.0
    return Effectiveness(recall, precision, len(retrieved), len(judgments), inter)


def load_judgments(path: str | Path) -> set[str]:
    """Read relevant doc ids, one per line; ``#`` starts a comment."""
    out: set[str] = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            out.add(body)
    return out


def _inversions(baseline_order: list[str], other_order: list[str]) -> int:
    """Pairs of documents ranked in opposite relative order."""
    pos = {doc: i for i, doc in enumerate(baseline_order)}
    seq = [pos[doc] for doc in other_order]
    count = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                count += 1
    return count


def _full_order(scores: dict[str, float]) -> list[str]:
    return [d for d, _ in sorted(scores.items(), key=lambda e: (-e[1], e[0]))]


def sensitivity(
    rule_id: int,
    grid: list[float],
    concept: str,
    corpus: Corpus,
    rb: RuleBase,
    registry: CombinerRegistry | None = None,
    proximity: ProximityConfig | None = None,
    threshold: float = 0.0,
    top: int | None = None,
) -> SensitivityReport:
    """Re-rank the corpus with one rule's weight swept across ``grid``.

    The target rule must be EVIDENCE or IMPLIES.  Each grid point records the
    top entries and the count of pairwise rank inversions against the
    baseline ranking over the whole corpus (ties broken by doc id).  The
    original rule base is untouched.
    """
    if not 0 <= rule_id < len(rb.rules):
        raise UnknownRuleError(f"no rule with id {rule_id}")
    if not isinstance(rb.rules[rule_id], (EvidenceRule, ImpliesRule)):
        raise UnknownRuleError(f"rule {rule_id} carries no weight")
    if not grid:
        raise ValueError("grid must be nonempty")
    for a, b in zip(grid, grid[1:]):
        if b <= a:
            raise ValueError("grid must be strictly increasing")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise ValueError("grid values must be in [0,1]")
    if concept not in rb.concepts:
        raise UnknownConceptError(f"unknown concept '{concept}'")

    base_scores = _scores(concept, corpus, rb, registry, proximity)
    base_order = _full_order(base_scores)
    baseline = _ranked(base_scores, threshold)

    points = []
    for w in grid:
        scores = _scores(concept, corpus, with_weight(rb, rule_id, w), registry, proximity)
        entries = _ranked(scores, threshold)
        if top is not None:
            entries = entries[:top]
        points.append(SensitivityPoint(w, entries, _inversions(base_order, _full_order(scores))))
    if top is not None:
        baseline = baseline[:top]
    return SensitivityReport(rule_id, tuple(grid), baseline, tuple(points))
