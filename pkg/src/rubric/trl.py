"""Text reference expressions: the AST, its surface syntax, and graded
evaluation against a single document.

Values are reals in [0, 1].  Quoted string patterns are crisp (matched or
not, with multi-word strings acting as phrases); the NEAR-* operators grade
by positional distance; concept references delegate back to the inference
engine through the evaluation environment's callback.

Operator surface spellings, as they appear inside rule files::

    (*AND* e1 e2 ...)   (*OR* e1 e2 ...)   (*NOT* e)
    (NEAR-W "A" "B")    (NEAR-S "A" "B")   (NEAR-P "A" "B")
    (SENTENCE "A" "B")  (PARAGRAPH "A" "B")
    (PRECEDES "A" "B")  (WITHIN n "A" "B") (PHRASE "A" "B" ...)
    (BEST-OF c1 ...)    (WEIGHT-OF c1 ...)

Distance and location operators take quoted patterns only; the logical
operators and BEST-OF/WEIGHT-OF also accept bare concept names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, Union

from . import sexpr
from .corpus import Document, distance, occurrences, split_words
from .errors import RuleParseError


@dataclass(frozen=True)
class Literal:
    """One quoted pattern; several words mean an implicit phrase."""

    words: tuple[str, ...]


@dataclass(frozen=True)
class ConceptRef:
    name: str


@dataclass(frozen=True)
class And:
    args: tuple["TextExpr", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["TextExpr", ...]


@dataclass(frozen=True)
class Not:
    arg: "TextExpr"


@dataclass(frozen=True)
class NearW:
    a: Literal
    b: Literal


@dataclass(frozen=True)
class NearS:
    a: Literal
    b: Literal


@dataclass(frozen=True)
class NearP:
    a: Literal
    b: Literal


@dataclass(frozen=True)
class Sentence:
    a: Literal
    b: Literal


@dataclass(frozen=True)
class Paragraph:
    a: Literal
    b: Literal


@dataclass(frozen=True)
class Precedes:
    a: Literal
    b: Literal


@dataclass(frozen=True)
class Within:
    n: int
    a: Literal
    b: Literal


@dataclass(frozen=True)
class Phrase:
    parts: tuple[Literal, ...]


@dataclass(frozen=True)
class BestOf:
    args: tuple[ConceptRef, ...]


@dataclass(frozen=True)
class WeightOf:
    args: tuple[ConceptRef, ...]


TextExpr = Union[
    Literal, ConceptRef, And, Or, Not,
    NearW, NearS, NearP, Sentence, Paragraph, Precedes, Within, Phrase,
    BestOf, WeightOf,
]


@dataclass(frozen=True)
class ProximityConfig:
    """Windows normalizing NEAR-* values: max(0, (window - d) / window)."""

    window_words: int = 10
    window_sentences: int = 3
    window_paragraphs: int = 2

    def __post_init__(self) -> None:
        for name in ("window_words", "window_sentences", "window_paragraphs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class EvalEnv:
    """Everything eval_expr needs: the document, a concept-value callback
    total over the rule base's concepts, and the proximity windows."""

    document: Document
    concept_value: Callable[[str], float]
    proximity: ProximityConfig = ProximityConfig()


_NAME = re.compile(r"[a-z0-9-]+$")


# ---------------------------------------------------------------------------
# surface syntax


def _err(line: int, message: str) -> RuleParseError:
    return RuleParseError([(line, message)])


def concept_name(node: sexpr.SNode, what: str = "concept") -> str:
    """Validate and normalize a bare symbol naming a concept or attribute."""
    if not isinstance(node, sexpr.Sym):
        raise _err(getattr(node, "line", 0), f"expected a {what} name")
    name = node.text.lower()
    if not _NAME.match(name):
        raise _err(node.line, f"invalid {what} name {node.text!r}")
    return name


def _literal(node: sexpr.SNode) -> Literal:
    if not isinstance(node, sexpr.Str):
        raise _err(getattr(node, "line", 0), "expected a quoted pattern")
    words = tuple(split_words(node.text))
    if not words:
        raise _err(node.line, "pattern contains no words")
    return Literal(words)


def expr_from_node(node: sexpr.SNode) -> TextExpr:
    """Build a TextExpr from one s-expression node, enforcing arity and
    argument-kind rules; raises RuleParseError with the offending line."""
    if isinstance(node, sexpr.Str):
        return _literal(node)
    if isinstance(node, sexpr.Sym):
        return ConceptRef(concept_name(node))
    if isinstance(node, sexpr.Num):
        raise _err(node.line, "unexpected number in expression")
    items = node.items
    if not items or not isinstance(items[0], sexpr.Sym):
        raise _err(node.line, "expected an operator")
    op = items[0].text.upper()
    args = items[1:]
    if op in ("*AND*", "*OR*"):
        if len(args) < 2:
            raise _err(node.line, f"{op} expects at least 2 arguments")
        parsed = tuple(expr_from_node(a) for a in args)
        return And(parsed) if op == "*AND*" else Or(parsed)
    if op == "*NOT*":
        if len(args) != 1:
            raise _err(node.line, "*NOT* expects exactly 1 argument")
        return Not(expr_from_node(args[0]))
    if op in ("NEAR-W", "NEAR-S", "NEAR-P", "SENTENCE", "PARAGRAPH", "PRECEDES"):
        if len(args) != 2:
            raise _err(node.line, f"{op} expects exactly 2 quoted patterns")
        a, b = _literal(args[0]), _literal(args[1])
        cls = {
            "NEAR-W": NearW, "NEAR-S": NearS, "NEAR-P": NearP,
            "SENTENCE": Sentence, "PARAGRAPH": Paragraph, "PRECEDES": Precedes,
        }[op]
        return cls(a, b)
    if op == "WITHIN":
        if len(args) != 3:
            raise _err(node.line, "WITHIN expects a word count and 2 quoted patterns")
        count = args[0]
        if not isinstance(count, sexpr.Num) or count.value != int(count.value) or count.value < 1:
            raise _err(node.line, "WITHIN count must be a positive integer")
        return Within(int(count.value), _literal(args[1]), _literal(args[2]))
    if op == "PHRASE":
        if len(args) < 2:
            raise _err(node.line, "PHRASE expects at least 2 quoted patterns")
        return Phrase(tuple(_literal(a) for a in args))
    if op in ("BEST-OF", "WEIGHT-OF"):
        if not args:
            raise _err(node.line, f"{op} expects at least 1 concept name")
        refs = tuple(ConceptRef(concept_name(a)) for a in args)
        return BestOf(refs) if op == "BEST-OF" else WeightOf(refs)
    raise _err(node.line, f"unknown operator {items[0].text!r}")


def render(e: TextExpr) -> str:
    """Canonical surface form of an expression."""
    if isinstance(e, Literal):
        return '"' + " ".join(e.words) + '"'
    if isinstance(e, ConceptRef):
        return e.name
    if isinstance(e, And):
        return "(*AND* " + " ".join(render(a) for a in e.args) + ")"
    if isinstance(e, Or):
        return "(*OR* " + " ".join(render(a) for a in e.args) + ")"
    if isinstance(e, Not):
        return f"(*NOT* {render(e.arg)})"
    if isinstance(e, (NearW, NearS, NearP, Sentence, Paragraph, Precedes)):
        op = {
            NearW: "NEAR-W", NearS: "NEAR-S", NearP: "NEAR-P",
            Sentence: "SENTENCE", Paragraph: "PARAGRAPH", Precedes: "PRECEDES",
        }[type(e)]
        return f"({op} {render(e.a)} {render(e.b)})"
    if isinstance(e, Within):
        return f"(WITHIN {e.n} {render(e.a)} {render(e.b)})"
    if isinstance(e, Phrase):
        return "(PHRASE " + " ".join(render(p) for p in e.parts) + ")"
    if isinstance(e, BestOf):
        return "(BEST-OF " + " ".join(r.name for r in e.args) + ")"
    if isinstance(e, WeightOf):
        return "(WEIGHT-OF " + " ".join(r.name for r in e.args) + ")"
    raise TypeError(f"not a TextExpr: {e!r}")


def walk(e: TextExpr) -> Iterator[TextExpr]:
    """Yield every subexpression of ``e``, including ``e`` itself."""
    yield e
    if isinstance(e, (And, Or)):
        for a in e.args:
            yield from walk(a)
    elif isinstance(e, Not):
        yield from walk(e.arg)
    elif isinstance(e, (NearW, NearS, NearP, Sentence, Paragraph, Precedes)):
        yield e.a
        yield e.b
    elif isinstance(e, Within):
        yield e.a
        yield e.b
    elif isinstance(e, Phrase):
        yield from e.parts
    elif isinstance(e, (BestOf, WeightOf)):
        yield from e.args


def concept_refs(e: TextExpr) -> list[str]:
    """Concept names referenced anywhere inside ``e``, in encounter order."""
    return [sub.name for sub in walk(e) if isinstance(sub, ConceptRef)]


# ---------------------------------------------------------------------------
# evaluation


def near_unit_window(e: TextExpr, prox: ProximityConfig) -> tuple[str, int]:
    if isinstance(e, NearW):
        return "word", prox.window_words
    if isinstance(e, NearS):
        return "sentence", prox.window_sentences
    if isinstance(e, NearP):
        return "paragraph", prox.window_paragraphs
    raise TypeError(f"not a NEAR operator: {e!r}")


def nearness(doc: Document, a: tuple[str, ...], b: tuple[str, ...], unit: str, window: int) -> float:
    """Best clamped-linear proximity over all occurrence pairs; 0 when either
    pattern is absent."""
    occ_a = occurrences(doc, a)
    occ_b = occurrences(doc, b)
    best = 0.0
    for oa in occ_a:
        for ob in occ_b:
            v = max(0.0, (window - distance(doc, oa, ob, unit)) / window)
            if v > best:
                best = v
    return best


def span_match(doc: Document, a: tuple[str, ...], b: tuple[str, ...], unit: str) -> bool:
    """True when some occurrence pair lies in the same sentence/paragraph."""
    occ_a = occurrences(doc, a)
    occ_b = occurrences(doc, b)
    return any(distance(doc, oa, ob, unit) == 0 for oa in occ_a for ob in occ_b)


def precedes_match(doc: Document, a: tuple[str, ...], b: tuple[str, ...]) -> bool:
    occ_a = occurrences(doc, a)
    occ_b = occurrences(doc, b)
    return any(oa.start < ob.start for oa in occ_a for ob in occ_b)


def within_match(doc: Document, n: int, a: tuple[str, ...], b: tuple[str, ...]) -> bool:
    occ_a = occurrences(doc, a)
    occ_b = occurrences(doc, b)
    return any(abs(oa.start - ob.start) <= n for oa in occ_a for ob in occ_b)


def phrase_words(e: Phrase) -> tuple[str, ...]:
    return tuple(w for part in e.parts for w in part.words)


def mean(values: list[float]) -> float:
    return sum(values) / len(values)


def eval_expr(e: TextExpr, env: EvalEnv) -> float:
    """Graded match value of ``e`` against ``env.document``.

    Logical operators are the standard infinite-valued connectives (min, max,
    1-x); location operators are crisp; NEAR-* grades by distance inside the
    configured window; BEST-OF takes the best concept value and WEIGHT-OF the
    mean.
    """
    doc = env.document
    if isinstance(e, Literal):
        return 1.0 if occurrences(doc, e.words) else 0.0
    if isinstance(e, ConceptRef):
        return float(env.concept_value(e.name))
    if isinstance(e, And):
        return min(eval_expr(a, env) for a in e.args)
    if isinstance(e, Or):
        return max(eval_expr(a, env) for a in e.args)
    if isinstance(e, Not):
        return 1.0 - eval_expr(e.arg, env)
    if isinstance(e, (NearW, NearS, NearP)):
        unit, window = near_unit_window(e, env.proximity)
        return nearness(doc, e.a.words, e.b.words, unit, window)
    if isinstance(e, Sentence):
        return 1.0 if span_match(doc, e.a.words, e.b.words, "sentence") else 0.0
    if isinstance(e, Paragraph):
        return 1.0 if span_match(doc, e.a.words, e.b.words, "paragraph") else 0.0
    if isinstance(e, Precedes):
        return 1.0 if precedes_match(doc, e.a.words, e.b.words) else 0.0
    if isinstance(e, Within):
        return 1.0 if within_match(doc, e.n, e.a.words, e.b.words) else 0.0
    if isinstance(e, Phrase):
        return 1.0 if occurrences(doc, phrase_words(e)) else 0.0
    if isinstance(e, BestOf):
        return max(float(env.concept_value(r.name)) for r in e.args)
    if isinstance(e, WeightOf):
        return mean([float(env.concept_value(r.name)) for r in e.args])
    raise TypeError(f"not a TextExpr: {e!r}")
