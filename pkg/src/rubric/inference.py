"""Concept evaluation: propagate graded evidence through EVIDENCE/IMPLIES
rules, the SUBSET/INSTANCE taxonomy, and attribute definitions, combining
per-category values and recording a complete evaluation trace.

Weighted rules contribute the product of their weight and the antecedent
value, so a full-strength antecedent contributes exactly the weight.  A
concept combines up to three category values:

* evidence  -- EVIDENCE and IMPLIES contributions, default ``max``;
* taxonomy  -- child concept values, default ``max``;
* attributes -- attribute values, default ``mean``; any NEC/SUF/AUX modifier
  replaces the mean with a gate (NEC below threshold forces 0) over a
  saturating sum, floored by the best qualifying SUF value.

Absent categories are skipped; the present values merge through the
cross-category combiner (default ``max``).  A concept with no rules is 0.
COMBINE rules override any of the four choices per concept; the registry
resolves the names.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from . import trl
from .corpus import Document, occurrences
from .errors import CombinerError, CyclicDependencyError
from .rulebase import (
    AttributeModifier,
    BUILTIN_COMBINERS,
    EvidenceRule,
    ImpliesRule,
    RuleBase,
    effective_attributes,
    resolve_attribute,
)

Combiner = Callable[[list[float]], float]


def _combine_max(values: list[float]) -> float:
    return max(values) if values else 0.0


def _combine_min(values: list[float]) -> float:
    return min(values) if values else 0.0


def _combine_mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _combine_saturating_sum(values: list[float]) -> float:
    return min(1.0, sum(values))


_BUILTINS: dict[str, Combiner] = {
    "max": _combine_max,
    "min": _combine_min,
    "mean": _combine_mean,
    "saturating-sum": _combine_saturating_sum,
}
assert set(_BUILTINS) == set(BUILTIN_COMBINERS)


class CombinerRegistry:
    """Named combining functions over [0,1] value lists.

    The engine never calls a combiner with an empty list (absent categories
    are skipped first); the built-ins still return 0.0 on empty input so they
    are total.
    """

    def __init__(self) -> None:
        self._functions: dict[str, Combiner] = dict(_BUILTINS)

    def register(self, name: str, fn: Combiner) -> "CombinerRegistry":
        if name in self._functions:
            raise CombinerError(f"combiner '{name}' already registered")
        self._functions[name] = fn
        return self

    def resolve(self, name: str) -> Combiner:
        try:
            return self._functions[name]
        except KeyError:
            raise CombinerError(f"unknown combiner '{name}'") from None

    def names(self) -> frozenset[str]:
        return frozenset(self._functions)

    def __contains__(self, name: str) -> bool:
        return name in self._functions


def default_registry() -> CombinerRegistry:
    return CombinerRegistry()


def register_combiner(reg: CombinerRegistry, name: str, fn: Combiner) -> CombinerRegistry:
    """Register ``fn`` under ``name``; collisions with built-ins or earlier
    registrations raise CombinerError.  Registration must happen before
    evaluation begins."""
    return reg.register(name, fn)


@dataclass(frozen=True)
class TraceNode:
    """One step of an evaluation.

    ``combiner`` names how ``value`` derives from the children: a registry
    name, ``scale`` (optional ``weight`` times the single child), ``not``
    (one minus the child), or ``attribute-gate`` (the modifier scheme over
    the children's modifiers).  Leaves carry their value directly.
    """

    subject: str
    value: float
    rule_id: int | None = None
    combiner: str | None = None
    weight: float | None = None
    modifier: AttributeModifier | None = None
    note: str | None = None
    children: tuple["TraceNode", ...] = ()


@dataclass(frozen=True)
class EvaluationTrace:
    root: TraceNode
    doc_id: str


def combine_attributes(
    concept: str,
    attrs: list[tuple[str, AttributeModifier | None, float]],
    registry: CombinerRegistry,
    combiner: str = "mean",
) -> float:
    """Merge (attribute, modifier, value) triples into one contribution.

    Without modifiers the named combiner applies.  With any modifier present:
    a NEC attribute below its threshold forces 0.0; otherwise the base is the
    saturating sum of every attribute value, and the best SUF value meeting
    its threshold floors the result.
    """
    if not attrs:
        return 0.0
    values = [v for _, _, v in attrs]
    if all(m is None for _, m, _ in attrs):
        return registry.resolve(combiner)(values)
    for _, m, v in attrs:
        if m is not None and m.kind == "NEC" and v < m.threshold:
            return 0.0
    result = min(1.0, sum(values))
    for _, m, v in attrs:
        if m is not None and m.kind == "SUF" and v >= m.threshold and v > result:
            result = v
    return result


def evaluate_concept(
    concept: str,
    doc: Document,
    rb: RuleBase,
    registry: CombinerRegistry | None = None,
    proximity: trl.ProximityConfig | None = None,
) -> tuple[float, EvaluationTrace]:
    """Relevance value of ``concept`` for one document, with its trace.

    Expects a rule base that validates without errors; evaluation is
    memoized per concept, so each concept and expression is computed once.
    """
    reg = registry if registry is not None else default_registry()
    prox = proximity if proximity is not None else trl.ProximityConfig()
    memo: dict[str, TraceNode] = {}
    building: set[str] = set()

    def category_combiner(name: str, category: str, default: str):
        cname = rb.combiner_name(name, category, default)
        try:
            return cname, reg.resolve(cname)
        except CombinerError:
            rid = rb.combine_rule_ids.get((name, category))
            raise CombinerError(f"unknown combiner '{cname}' (rule {rid})") from None

    def concept_node(name: str) -> TraceNode:
        node = memo.get(name)
        if node is not None:
            return node
        if name in building:
            raise CyclicDependencyError(f"concept '{name}' depends on itself")
        building.add(name)
        try:
            node = _build(name)
        finally:
            building.discard(name)
        memo[name] = node
        return node

    def expr_node(e: trl.TextExpr) -> TraceNode:
        if isinstance(e, trl.Literal):
            occ = occurrences(doc, e.words)
            return TraceNode(
                subject=trl.render(e),
                value=1.0 if occ else 0.0,
                note=f"word {occ[0].start}" if occ else "no match",
            )
        if isinstance(e, trl.ConceptRef):
            return concept_node(e.name)
        if isinstance(e, (trl.And, trl.Or)):
            ch = tuple(expr_node(a) for a in e.args)
            vals = [c.value for c in ch]
            op = "min" if isinstance(e, trl.And) else "max"
            return TraceNode(subject=trl.render(e), combiner=op,
                             value=reg.resolve(op)(vals), children=ch)
        if isinstance(e, trl.Not):
            child = expr_node(e.arg)
            return TraceNode(subject=trl.render(e), combiner="not",
                             value=1.0 - child.value, children=(child,))
        if isinstance(e, (trl.NearW, trl.NearS, trl.NearP)):
            unit, window = trl.near_unit_window(e, prox)
            value = trl.nearness(doc, e.a.words, e.b.words, unit, window)
            return TraceNode(subject=trl.render(e), value=value)
        if isinstance(e, trl.Sentence):
            return TraceNode(subject=trl.render(e),
                             value=1.0 if trl.span_match(doc, e.a.words, e.b.words, "sentence") else 0.0)
        if isinstance(e, trl.Paragraph):
            return TraceNode(subject=trl.render(e),
                             value=1.0 if trl.span_match(doc, e.a.words, e.b.words, "paragraph") else 0.0)
        if isinstance(e, trl.Precedes):
            return TraceNode(subject=trl.render(e),
                             value=1.0 if trl.precedes_match(doc, e.a.words, e.b.words) else 0.0)
        if isinstance(e, trl.Within):
            return TraceNode(subject=trl.render(e),
                             value=1.0 if trl.within_match(doc, e.n, e.a.words, e.b.words) else 0.0)
        if isinstance(e, trl.Phrase):
            return TraceNode(subject=trl.render(e),
                             value=1.0 if occurrences(doc, trl.phrase_words(e)) else 0.0)
        if isinstance(e, (trl.BestOf, trl.WeightOf)):
            ch = tuple(concept_node(r.name) for r in e.args)
            vals = [c.value for c in ch]
            op = "max" if isinstance(e, trl.BestOf) else "mean"
            return TraceNode(subject=trl.render(e), combiner=op,
                             value=reg.resolve(op)(vals), children=ch)
        raise TypeError(f"not a TextExpr: {e!r}")

    def weighted(rule: EvidenceRule) -> TraceNode:
        node = expr_node(rule.expr)
        if isinstance(rule.expr, trl.ConceptRef):
            # the concept node is shared; wrap instead of rewriting it
            return TraceNode(subject=rule.expr.name, rule_id=rule.id, combiner="scale",
                             weight=rule.weight, value=rule.weight * node.value, children=(node,))
        return replace(node, rule_id=rule.id, weight=rule.weight, value=rule.weight * node.value)

    def _build(name: str) -> TraceNode:
        categories: list[TraceNode] = []

        contribs: list[TraceNode] = []
        for r in rb.rules:
            if isinstance(r, EvidenceRule) and r.concept == name:
                contribs.append(weighted(r))
            elif isinstance(r, ImpliesRule) and r.target == name:
                src = concept_node(r.source)
                contribs.append(TraceNode(subject=r.source, rule_id=r.id, combiner="scale",
                                          weight=r.weight, value=r.weight * src.value,
                                          children=(src,)))
        if contribs:
            cname, combine = category_combiner(name, "evidence", "max")
            categories.append(TraceNode(subject=name, note="evidence", combiner=cname,
                                        value=combine([c.value for c in contribs]),
                                        children=tuple(contribs)))

        kids = rb.children_of.get(name, ())
        if kids:
            knodes = []
            for child, rid in kids:
                cn = concept_node(child)
                knodes.append(TraceNode(subject=child, rule_id=rid, combiner="scale",
                                        value=cn.value, children=(cn,)))
            cname, combine = category_combiner(name, "taxonomy", "max")
            categories.append(TraceNode(subject=name, note="taxonomy", combiner=cname,
                                        value=combine([k.value for k in knodes]),
                                        children=tuple(knodes)))

        eff = effective_attributes(rb, name)
        if eff:
            anodes = []
            for attr, mod, rid in eff:
                expr = resolve_attribute(name, attr, rb)
                if expr is None:
                    anodes.append(TraceNode(subject=attr, rule_id=rid, value=0.0,
                                            modifier=mod, note="no defining expression"))
                else:
                    en = expr_node(expr)
                    anodes.append(TraceNode(subject=attr, rule_id=rid, combiner="scale",
                                            value=en.value, modifier=mod, children=(en,)))
            cname, _ = category_combiner(name, "attribute", "mean")
            gated = any(mod is not None for _, mod, _ in eff)
            value = combine_attributes(
                name, [(a.subject, a.modifier, a.value) for a in anodes], reg, cname)
            categories.append(TraceNode(subject=name, note="attributes",
                                        combiner="attribute-gate" if gated else cname,
                                        value=value, children=tuple(anodes)))

        if not categories:
            return TraceNode(subject=name, value=0.0, note="no rules")
        cross, combine = category_combiner(name, "cross", "max")
        return TraceNode(subject=name, combiner=cross,
                         value=combine([c.value for c in categories]),
                         children=tuple(categories))

    root = concept_node(concept)
    return root.value, EvaluationTrace(root=root, doc_id=doc.doc_id)


def recompute_trace(node: TraceNode, registry: CombinerRegistry | None = None) -> float:
    """Recompute a node's value bottom-up from its children.

    Leaves keep their stored value.  Matches the builder's arithmetic
    operation for operation, so the result reproduces the stored value
    bit-exactly.
    """
    reg = registry if registry is not None else default_registry()
    if not node.children:
        return node.value
    vals = [recompute_trace(c, reg) for c in node.children]
    if node.combiner == "scale":
        base = vals[0]
    elif node.combiner == "not":
        base = 1.0 - vals[0]
    elif node.combiner == "attribute-gate":
        attrs = [(c.subject, c.modifier, v) for c, v in zip(node.children, vals)]
        base = combine_attributes(node.subject, attrs, reg)
    elif node.combiner is not None:
        base = reg.resolve(node.combiner)(vals)
    else:
        return node.value
    return node.weight * base if node.weight is not None else base


_CATEGORY_NOTES = frozenset({"evidence", "taxonomy", "attributes"})


def _format_node(n: TraceNode, depth: int) -> str:
    parts = [n.subject]
    if n.modifier is not None:
        if n.modifier.threshold is not None:
            parts.append(f"(*{n.modifier.kind}* {n.modifier.threshold:g})")
        else:
            parts.append(f"(*{n.modifier.kind}*)")
    if n.note in _CATEGORY_NOTES:
        parts.append(f"<{n.note}>")
    if n.rule_id is not None:
        parts.append(f"rule={n.rule_id}")
    if n.combiner not in (None, "scale"):
        parts.append(f"combine={n.combiner}")
    if n.weight is not None:
        parts.append(f"weight={n.weight:g}")
    parts.append(f"value={n.value:.6f}")
    if n.note == "no match":
        parts.append("[no match]")
    elif n.note is not None and n.note.startswith("word "):
        parts.append(f"[first match at {n.note}]")
    elif n.note == "no defining expression":
        parts.append("[no defining expression]")
    elif n.note == "no rules":
        parts.append("[no rules]")
    return "  " * depth + " ".join(parts)


def explain(trace: EvaluationTrace) -> str:
    """Indented textual report of one (concept, document) evaluation.

    Each line shows the subject, the applied rule id, the combiner, and the
    value; literal leaves show where their first match starts.  A root value
    of 0 prints only the root line (there is nothing to explain).  The
    single-category/single-contribution layer is elided so trivial chains
    stay compact.
    """
    root = trace.root
    if root.value == 0.0:
        return _format_node(root, 0) + "\n"
    lines: list[str] = []

    def emit(node: TraceNode, depth: int) -> None:
        lines.append(_format_node(node, depth))
        children = node.children
        if (
            len(children) == 1
            and children[0].note in _CATEGORY_NOTES
            and len(children[0].children) == 1
        ):
            emit(children[0].children[0], depth + 1)
        else:
            for c in children:
                emit(c, depth + 1)

    emit(root, 0)
    return "\n".join(lines) + "\n"
