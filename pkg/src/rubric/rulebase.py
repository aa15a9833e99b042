"""Rule model, file parser, global validation, attribute inheritance, and
canonical serialization.

Rule file surface forms (one s-expression per rule, ``;`` comments)::

    (ATTRIBUTE concept attr)
    (ATTRIBUTE concept ((*NEC* attr) threshold))
    (ATTRIBUTE concept ((*SUF* attr) threshold))
    (ATTRIBUTE concept (*AUX* attr))
    (DEFINES attr expr)
    (DEFINES concept:attr expr)
    (SUBSET parent child)
    (INSTANCE class member)
    (EVIDENCE concept (expr weight))
    (IMPLIES target (source weight))
    (COMBINE concept function)
    (COMBINE concept category function)

Symbols are case-insensitive and normalized to lowercase.  Weights and
thresholds are reals in [0, 1].  Rule ids are zero-based file positions.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Collection, Iterator, Union

from . import sexpr, trl
from .errors import AmbiguousAttributeError, RuleParseError, UnknownRuleError

CATEGORIES = ("evidence", "taxonomy", "attribute", "cross")
BUILTIN_COMBINERS = ("max", "min", "mean", "saturating-sum")


@dataclass(frozen=True)
class AttributeModifier:
    kind: str  # "NEC" | "SUF" | "AUX"
    threshold: float | None = None


@dataclass(frozen=True)
class AttributeKey:
    attr: str
    concept: str | None = None

    def render(self) -> str:
        return f"{self.concept}:{self.attr}" if self.concept else self.attr


@dataclass(frozen=True)
class AttributeRule:
    id: int
    concept: str
    attr: str
    modifier: AttributeModifier | None = None


@dataclass(frozen=True)
class DefinesRule:
    id: int
    key: AttributeKey
    expr: trl.TextExpr


@dataclass(frozen=True)
class SubsetRule:
    id: int
    parent: str
    child: str


@dataclass(frozen=True)
class InstanceRule:
    id: int
    parent: str
    member: str


@dataclass(frozen=True)
class EvidenceRule:
    id: int
    concept: str
    expr: trl.TextExpr
    weight: float


@dataclass(frozen=True)
class ImpliesRule:
    id: int
    target: str
    source: str
    weight: float


@dataclass(frozen=True)
class CombineRule:
    id: int
    concept: str
    category: str
    function: str


Rule = Union[
    AttributeRule, DefinesRule, SubsetRule, InstanceRule,
    EvidenceRule, ImpliesRule, CombineRule,
]


@dataclass(frozen=True)
class Finding:
    rule_id: int | None
    message: str


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[Finding, ...]
    warnings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class RuleBase:
    """Parsed rule set with derived lookup indexes.

    Immutable after construction; equality and hashing consider the rule
    list only.
    """

    rules: tuple[Rule, ...]
    concepts: frozenset[str] = field(init=False, compare=False, repr=False)
    concept_rules: dict[str, tuple[int, ...]] = field(init=False, compare=False, repr=False)
    evidence_for: dict[str, tuple[EvidenceRule, ...]] = field(init=False, compare=False, repr=False)
    implies_for: dict[str, tuple[ImpliesRule, ...]] = field(init=False, compare=False, repr=False)
    children_of: dict[str, tuple[tuple[str, int], ...]] = field(init=False, compare=False, repr=False)
    parents_of: dict[str, tuple[str, ...]] = field(init=False, compare=False, repr=False)
    attr_rules_of: dict[str, tuple[AttributeRule, ...]] = field(init=False, compare=False, repr=False)
    defines_for: dict[tuple[str | None, str], tuple[DefinesRule, ...]] = field(init=False, compare=False, repr=False)
    combine_for: dict[tuple[str, str], str] = field(init=False, compare=False, repr=False)
    combine_rule_ids: dict[tuple[str, str], int] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        mentioned: dict[str, list[int]] = {}
        evidence: dict[str, list[EvidenceRule]] = {}
        implies: dict[str, list[ImpliesRule]] = {}
        children: dict[str, list[tuple[str, int]]] = {}
        parents: dict[str, list[str]] = {}
        attr_rules: dict[str, list[AttributeRule]] = {}
        defines: dict[tuple[str | None, str], list[DefinesRule]] = {}
        combine: dict[tuple[str, str], str] = {}
        combine_ids: dict[tuple[str, str], int] = {}

        def mention(name: str, rid: int) -> None:
            mentioned.setdefault(name, []).append(rid)

        for r in self.rules:
            if isinstance(r, AttributeRule):
                mention(r.concept, r.id)
                attr_rules.setdefault(r.concept, []).append(r)
            elif isinstance(r, DefinesRule):
                if r.key.concept:
                    mention(r.key.concept, r.id)
                for name in trl.concept_refs(r.expr):
                    mention(name, r.id)
                defines.setdefault((r.key.concept, r.key.attr), []).append(r)
            elif isinstance(r, (SubsetRule, InstanceRule)):
                child = r.child if isinstance(r, SubsetRule) else r.member
                mention(r.parent, r.id)
                mention(child, r.id)
                children.setdefault(r.parent, []).append((child, r.id))
                ps = parents.setdefault(child, [])
                if r.parent not in ps:
                    ps.append(r.parent)
            elif isinstance(r, EvidenceRule):
                mention(r.concept, r.id)
                for name in trl.concept_refs(r.expr):
                    mention(name, r.id)
                evidence.setdefault(r.concept, []).append(r)
            elif isinstance(r, ImpliesRule):
                mention(r.target, r.id)
                mention(r.source, r.id)
                implies.setdefault(r.target, []).append(r)
            elif isinstance(r, CombineRule):
                mention(r.concept, r.id)
                combine.setdefault((r.concept, r.category), r.function)
                combine_ids.setdefault((r.concept, r.category), r.id)

        set_ = object.__setattr__
        set_(self, "concepts", frozenset(mentioned))
        set_(self, "concept_rules", {k: tuple(v) for k, v in mentioned.items()})
        set_(self, "evidence_for", {k: tuple(v) for k, v in evidence.items()})
        set_(self, "implies_for", {k: tuple(v) for k, v in implies.items()})
        set_(self, "children_of", {k: tuple(v) for k, v in children.items()})
        set_(self, "parents_of", {k: tuple(v) for k, v in parents.items()})
        set_(self, "attr_rules_of", {k: tuple(v) for k, v in attr_rules.items()})
        set_(self, "defines_for", {k: tuple(v) for k, v in defines.items()})
        set_(self, "combine_for", combine)
        set_(self, "combine_rule_ids", combine_ids)

    def combiner_name(self, concept: str, category: str, default: str) -> str:
        return self.combine_for.get((concept, category), default)


# ---------------------------------------------------------------------------
# parsing


def parse_rulebase(source: str) -> RuleBase:
    """Parse rule file text; raises RuleParseError listing every problem
    found, each with its source line."""
    forms = sexpr.read_forms(source)
    rules: list[Rule] = []
    problems: list[tuple[int, str]] = []
    for form in forms:
        try:
            rules.append(_rule_from_form(form, len(rules)))
        except RuleParseError as exc:
            problems.extend(exc.problems)
    if problems:
        raise RuleParseError(problems)
    return RuleBase(tuple(rules))


def _err(line: int, message: str) -> RuleParseError:
    return RuleParseError([(line, message)])


def _weight(node: sexpr.SNode, what: str = "weight") -> float:
    if not isinstance(node, sexpr.Num):
        raise _err(getattr(node, "line", 0), f"expected a {what}")
    if not 0.0 <= node.value <= 1.0:
        raise _err(node.line, f"{what} {node.value:g} outside [0,1]")
    return node.value


def _attr_key(node: sexpr.SNode) -> AttributeKey:
    if not isinstance(node, sexpr.Sym):
        raise _err(getattr(node, "line", 0), "expected an attribute key")
    text = node.text.lower()
    if ":" not in text:
        return AttributeKey(trl.concept_name(node, "attribute"))
    parts = text.split(":")
    if len(parts) != 2 or not all(trl._NAME.match(p) for p in parts):
        raise _err(node.line, f"malformed concept:attribute key {node.text!r}")
    return AttributeKey(parts[1], parts[0])


def _attribute_rule(rid: int, args: tuple[sexpr.SNode, ...], line: int) -> AttributeRule:
    concept = trl.concept_name(args[0])
    spec = args[1]
    if isinstance(spec, sexpr.Sym):
        return AttributeRule(rid, concept, trl.concept_name(spec, "attribute"))
    if not isinstance(spec, sexpr.SList) or not spec.items:
        raise _err(line, "malformed ATTRIBUTE form")
    head = spec.items[0]
    if isinstance(head, sexpr.Sym):
        kind = head.text.upper()
        if kind == "*AUX*":
            if len(spec.items) != 2:
                raise _err(spec.line, "*AUX* expects exactly one attribute name")
            attr = trl.concept_name(spec.items[1], "attribute")
            return AttributeRule(rid, concept, attr, AttributeModifier("AUX"))
        if kind in ("*NEC*", "*SUF*"):
            raise _err(spec.line, f"{kind} requires a threshold: ((*{kind.strip('*')}* attr) t)")
        raise _err(spec.line, f"unknown attribute modifier {head.text!r}")
    if isinstance(head, sexpr.SList):
        if len(spec.items) != 2:
            raise _err(spec.line, "modified ATTRIBUTE expects ((*NEC*|*SUF* attr) threshold)")
        if len(head.items) != 2 or not isinstance(head.items[0], sexpr.Sym):
            raise _err(head.line, "malformed attribute modifier")
        kind = head.items[0].text.upper()
        if kind == "*AUX*":
            raise _err(head.line, "*AUX* takes no threshold")
        if kind not in ("*NEC*", "*SUF*"):
            raise _err(head.line, f"unknown attribute modifier {head.items[0].text!r}")
        attr = trl.concept_name(head.items[1], "attribute")
        threshold = _weight(spec.items[1], "threshold")
        return AttributeRule(rid, concept, attr, AttributeModifier(kind.strip("*").upper(), threshold))
    raise _err(spec.line, "malformed ATTRIBUTE form")


def _rule_from_form(form: sexpr.SNode, rid: int) -> Rule:
    if not isinstance(form, sexpr.SList) or not form.items:
        raise _err(getattr(form, "line", 0), "expected a rule form")
    head_node = form.items[0]
    if not isinstance(head_node, sexpr.Sym):
        raise _err(form.line, "expected a rule head")
    head = head_node.text.upper()
    args = form.items[1:]

    if head == "ATTRIBUTE":
        if len(args) != 2:
            raise _err(form.line, "ATTRIBUTE expects a concept and an attribute")
        return _attribute_rule(rid, args, form.line)
    if head == "DEFINES":
        if len(args) != 2:
            raise _err(form.line, "DEFINES expects a key and an expression")
        return DefinesRule(rid, _attr_key(args[0]), trl.expr_from_node(args[1]))
    if head in ("SUBSET", "INSTANCE"):
        if len(args) != 2:
            raise _err(form.line, f"{head} expects two concept names")
        parent = trl.concept_name(args[0])
        other = trl.concept_name(args[1])
        if head == "SUBSET":
            return SubsetRule(rid, parent, other)
        return InstanceRule(rid, parent, other)
    if head == "EVIDENCE":
        if len(args) != 2 or not isinstance(args[1], sexpr.SList) or len(args[1].items) != 2:
            raise _err(form.line, "EVIDENCE expects a concept and (expression weight)")
        concept = trl.concept_name(args[0])
        expr = trl.expr_from_node(args[1].items[0])
        weight = _weight(args[1].items[1])
        return EvidenceRule(rid, concept, expr, weight)
    if head == "IMPLIES":
        if len(args) != 2 or not isinstance(args[1], sexpr.SList) or len(args[1].items) != 2:
            raise _err(form.line, "IMPLIES expects a target and (source weight)")
        target = trl.concept_name(args[0])
        source = trl.concept_name(args[1].items[0])
        weight = _weight(args[1].items[1])
        return ImpliesRule(rid, target, source, weight)
    if head == "COMBINE":
        if len(args) == 2:
            concept = trl.concept_name(args[0])
            return CombineRule(rid, concept, "cross", trl.concept_name(args[1], "combiner"))
        if len(args) == 3:
            concept = trl.concept_name(args[0])
            category = trl.concept_name(args[1], "category")
            if category not in CATEGORIES:
                raise _err(form.line, f"unknown COMBINE category {category!r}")
            return CombineRule(rid, concept, category, trl.concept_name(args[2], "combiner"))
        raise _err(form.line, "COMBINE expects a concept, optional category, and function name")
    raise _err(form.line, f"unknown rule head {head_node.text!r}")


# ---------------------------------------------------------------------------
# serialization


def format_weight(x: float) -> str:
    """Minimal decimal rendering that float() reads back exactly."""
    if x == int(x):
        return str(int(x))
    return repr(x)


def render_rule(r: Rule) -> str:
    if isinstance(r, AttributeRule):
        if r.modifier is None:
            return f"(ATTRIBUTE {r.concept} {r.attr})"
        if r.modifier.kind == "AUX":
            return f"(ATTRIBUTE {r.concept} (*AUX* {r.attr}))"
        return (
            f"(ATTRIBUTE {r.concept} ((*{r.modifier.kind}* {r.attr})"
            f" {format_weight(r.modifier.threshold)}))"
        )
    if isinstance(r, DefinesRule):
        return f"(DEFINES {r.key.render()} {trl.render(r.expr)})"
    if isinstance(r, SubsetRule):
        return f"(SUBSET {r.parent} {r.child})"
    if isinstance(r, InstanceRule):
        return f"(INSTANCE {r.parent} {r.member})"
    if isinstance(r, EvidenceRule):
        return f"(EVIDENCE {r.concept} ({trl.render(r.expr)} {format_weight(r.weight)}))"
    if isinstance(r, ImpliesRule):
        return f"(IMPLIES {r.target} ({r.source} {format_weight(r.weight)}))"
    if isinstance(r, CombineRule):
        return f"(COMBINE {r.concept} {r.category} {r.function})"
    raise TypeError(f"not a Rule: {r!r}")


def serialize(rb: RuleBase) -> str:
    """Canonical text: one rule per line, in id order; parse(serialize(rb))
    equals rb."""
    return "".join(render_rule(r) + "\n" for r in rb.rules)


def with_weight(rb: RuleBase, rule_id: int, weight: float) -> RuleBase:
    """Copy of ``rb`` with one EVIDENCE/IMPLIES weight replaced."""
    if not 0 <= rule_id < len(rb.rules):
        raise UnknownRuleError(f"no rule with id {rule_id}")
    rule = rb.rules[rule_id]
    if not isinstance(rule, (EvidenceRule, ImpliesRule)):
        raise UnknownRuleError(f"rule {rule_id} carries no weight")
    replaced = dataclasses.replace(rule, weight=weight)
    rules = rb.rules[:rule_id] + (replaced,) + rb.rules[rule_id + 1 :]
    return RuleBase(rules)


# ---------------------------------------------------------------------------
# inheritance


def ancestor_levels(rb: RuleBase, concept: str) -> Iterator[list[str]]:
    """Breadth-first ancestor levels, nearest first, in first-mention order."""
    frontier = list(rb.parents_of.get(concept, ()))
    seen = {concept, *frontier}
    while frontier:
        yield frontier
        nxt: list[str] = []
        for name in frontier:
            for parent in rb.parents_of.get(name, ()):
                if parent not in seen:
                    seen.add(parent)
                    nxt.append(parent)
        frontier = nxt


def _binding(rb: RuleBase, owner: str | None, attr: str, for_concept: str) -> trl.TextExpr | None:
    ds = rb.defines_for.get((owner, attr), ())
    if not ds:
        return None
    exprs: list[trl.TextExpr] = []
    for d in ds:
        if d.expr not in exprs:
            exprs.append(d.expr)
    if len(exprs) > 1:
        raise AmbiguousAttributeError(for_concept, attr, tuple(d.id for d in ds))
    return exprs[0]


def resolve_attribute(concept: str, attr: str, rb: RuleBase) -> trl.TextExpr | None:
    """Expression bound to ``concept:attr``.

    Checks the concept's own binding, then each ancestor level outward
    (erroring when one level binds the attribute two different ways), then
    the global binding; None when nothing binds the attribute.
    """
    local = _binding(rb, concept, attr, concept)
    if local is not None:
        return local
    for level in ancestor_levels(rb, concept):
        exprs: list[trl.TextExpr] = []
        ids: list[int] = []
        for anc in level:
            for d in rb.defines_for.get((anc, attr), ()):
                ids.append(d.id)
                if d.expr not in exprs:
                    exprs.append(d.expr)
        if len(exprs) > 1:
            raise AmbiguousAttributeError(concept, attr, tuple(ids))
        if exprs:
            return exprs[0]
    return _binding(rb, None, attr, concept)


def effective_attributes(rb: RuleBase, concept: str) -> tuple[tuple[str, AttributeModifier | None, int], ...]:
    """Attribute declarations in effect for ``concept``.

    A concept's own ATTRIBUTE rules replace any inherited set; otherwise the
    nearest ancestor level carrying declarations supplies them.  Within one
    level the first declaration (by rule id) of each attribute name wins.
    Returns (attribute, modifier, declaring rule id) triples in rule order.
    """
    candidates = rb.attr_rules_of.get(concept, ())
    if not candidates:
        for level in ancestor_levels(rb, concept):
            pool = [r for anc in level for r in rb.attr_rules_of.get(anc, ())]
            if pool:
                candidates = tuple(sorted(pool, key=lambda r: r.id))
                break
    out: list[tuple[str, AttributeModifier | None, int]] = []
    seen: set[str] = set()
    for r in candidates:
        if r.attr not in seen:
            seen.add(r.attr)
            out.append((r.attr, r.modifier, r.id))
    return tuple(out)


# ---------------------------------------------------------------------------
# validation


def dependency_graph(rb: RuleBase, warnings: list[Finding] | None = None) -> dict[str, list[str]]:
    """Evaluation dependency edges: concept -> concepts its value reads.

    Covers taxonomy children, IMPLIES sources, and concept references inside
    EVIDENCE and resolved attribute expressions.  Attribute bindings that are
    ambiguous are skipped here (they fail at evaluation time); a warning is
    recorded when a warnings list is supplied.
    """
    graph: dict[str, list[str]] = {}
    for c in sorted(rb.concepts):
        deps: list[str] = []
        for ev in rb.evidence_for.get(c, ()):
            deps.extend(trl.concept_refs(ev.expr))
        for imp in rb.implies_for.get(c, ()):
            deps.append(imp.source)
        deps.extend(child for child, _ in rb.children_of.get(c, ()))
        for attr, _, _ in effective_attributes(rb, c):
            try:
                expr = resolve_attribute(c, attr, rb)
            except AmbiguousAttributeError as exc:
                if warnings is not None:
                    warnings.append(Finding(exc.rule_ids[0], str(exc)))
                continue
            if expr is not None:
                deps.extend(trl.concept_refs(expr))
        unique: list[str] = []
        for d in deps:
            if d not in unique:
                unique.append(d)
        graph[c] = unique
    return graph


def _find_cycle(graph: dict[str, list[str]]) -> list[str] | None:
    state: dict[str, int] = {}  # 1 = on path, 2 = done
    for start in sorted(graph):
        if state.get(start):
            continue
        stack: list[tuple[str, int]] = [(start, 0)]
        path: list[str] = []
        while stack:
            node, idx = stack.pop()
            if idx == 0:
                state[node] = 1
                path.append(node)
            deps = graph.get(node, [])
            if idx < len(deps):
                stack.append((node, idx + 1))
                nxt = deps[idx]
                mark = state.get(nxt)
                if mark == 1:
                    cycle = path[path.index(nxt) :]
                    pivot = cycle.index(min(cycle))
                    return cycle[pivot:] + cycle[:pivot]
                if mark is None:
                    stack.append((nxt, 0))
            else:
                state[node] = 2
                path.pop()
    return None


def _declared_on_or_above(rb: RuleBase, concept: str, attr: str) -> bool:
    if any(r.attr == attr for r in rb.attr_rules_of.get(concept, ())):
        return True
    for level in ancestor_levels(rb, concept):
        for anc in level:
            if any(r.attr == attr for r in rb.attr_rules_of.get(anc, ())):
                return True
    return False


def _has_value_source(rb: RuleBase, concept: str) -> bool:
    if rb.evidence_for.get(concept) or rb.implies_for.get(concept) or rb.children_of.get(concept):
        return True
    for attr, _, _ in effective_attributes(rb, concept):
        try:
            if resolve_attribute(concept, attr, rb) is not None:
                return True
        except AmbiguousAttributeError:
            return True  # bound, if ambiguously; reported elsewhere
    return False


def validate(rb: RuleBase, combiners: Collection[str] | None = None) -> ValidationReport:
    """Check global consistency.  Never raises; reports errors and warnings.

    ``combiners`` names the registered combining functions; defaults to the
    built-ins.
    """
    known = frozenset(combiners) if combiners is not None else frozenset(BUILTIN_COMBINERS)
    errors: list[Finding] = []
    warnings: list[Finding] = []

    declared_anywhere = {r.attr for r in rb.rules if isinstance(r, AttributeRule)}
    combine_seen: dict[tuple[str, str], int] = {}
    for r in rb.rules:
        if isinstance(r, AttributeRule) and r.modifier is not None:
            m = r.modifier
            if m.kind in ("NEC", "SUF"):
                if m.threshold is None:
                    errors.append(Finding(r.id, f"{m.kind} modifier requires a threshold"))
                elif not 0.0 <= m.threshold <= 1.0:
                    errors.append(Finding(r.id, f"threshold {m.threshold:g} outside [0,1]"))
            elif m.kind == "AUX" and m.threshold is not None:
                errors.append(Finding(r.id, "AUX modifier takes no threshold"))
        elif isinstance(r, DefinesRule):
            if r.key.concept is None:
                if r.key.attr not in declared_anywhere:
                    errors.append(Finding(r.id, f"DEFINES for undeclared attribute '{r.key.attr}'"))
            elif not _declared_on_or_above(rb, r.key.concept, r.key.attr):
                errors.append(Finding(
                    r.id,
                    f"DEFINES for '{r.key.render()}' but no ATTRIBUTE declares "
                    f"'{r.key.attr}' on '{r.key.concept}' or its ancestors",
                ))
        elif isinstance(r, CombineRule):
            key = (r.concept, r.category)
            if key in combine_seen:
                errors.append(Finding(
                    r.id,
                    f"duplicate COMBINE for ({r.concept}, {r.category}); rule "
                    f"{combine_seen[key]} already set it",
                ))
            else:
                combine_seen[key] = r.id
            if r.function not in known:
                errors.append(Finding(r.id, f"COMBINE names unregistered function '{r.function}'"))

    graph = dependency_graph(rb, warnings)
    cycle = _find_cycle(graph)
    if cycle:
        errors.append(Finding(None, "cycle: " + "→".join(cycle + [cycle[0]])))

    for c in sorted(rb.concepts):
        if not _has_value_source(rb, c):
            warnings.append(Finding(None, f"concept '{c}' has no evidence source and evaluates to 0"))
    for c in sorted(rb.concepts):
        if c + "s" in rb.concepts:
            warnings.append(Finding(None, f"concept names '{c}' and '{c}s' differ only by a trailing 's'"))

    for r in rb.rules:
        expr = r.expr if isinstance(r, (DefinesRule, EvidenceRule)) else None
        if expr is None:
            continue
        for sub in trl.walk(expr):
            if isinstance(sub, (trl.NearW, trl.NearS, trl.NearP)) and sub.a == sub.b:
                warnings.append(Finding(r.id, f"NEAR compares pattern {trl.render(sub.a)} with itself"))

    return ValidationReport(tuple(errors), tuple(warnings))
