"""Rule-based, explainable concept retrieval over plain-text corpora.

Rule files define concepts, their taxonomy and attributes, and weighted
links from text patterns to concepts; the engine scores each document in
[0, 1] per concept, ranks a corpus, explains every score, measures
recall/precision against judgments, and sweeps rule weights for sensitivity
analysis.
"""

__version__ = "0.1.0"

from .corpus import (
    Corpus,
    Document,
    PatternOccurrence,
    Token,
    distance,
    load_corpus,
    make_corpus,
    occurrences,
    tokenize,
)
from .errors import (
    AmbiguousAttributeError,
    CombinerError,
    CorpusError,
    CyclicDependencyError,
    RubricError,
    RuleParseError,
    UnknownConceptError,
    UnknownRuleError,
)
from .inference import (
    CombinerRegistry,
    EvaluationTrace,
    TraceNode,
    combine_attributes,
    default_registry,
    evaluate_concept,
    explain,
    recompute_trace,
    register_combiner,
)
from .retrieval import (
    Effectiveness,
    RetrievalResult,
    SensitivityPoint,
    SensitivityReport,
    effectiveness,
    load_judgments,
    query,
    sensitivity,
)
from .rulebase import (
    AttributeKey,
    AttributeModifier,
    AttributeRule,
    CombineRule,
    DefinesRule,
    EvidenceRule,
    Finding,
    ImpliesRule,
    InstanceRule,
    RuleBase,
    SubsetRule,
    ValidationReport,
    dependency_graph,
    effective_attributes,
    parse_rulebase,
    resolve_attribute,
    serialize,
    validate,
    with_weight,
)
from .trl import EvalEnv, ProximityConfig, TextExpr, eval_expr, render

__all__ = [
    "__version__",
    "AmbiguousAttributeError", "CombinerError", "CorpusError", "CyclicDependencyError",
    "RubricError", "RuleParseError", "UnknownConceptError", "UnknownRuleError",
    "Corpus", "Document", "PatternOccurrence", "Token",
    "distance", "load_corpus", "make_corpus", "occurrences", "tokenize",
    "CombinerRegistry", "EvaluationTrace", "TraceNode",
    "combine_attributes", "default_registry", "evaluate_concept", "explain",
    "recompute_trace", "register_combiner",
    "Effectiveness", "RetrievalResult", "SensitivityPoint", "SensitivityReport",
    "effectiveness", "load_judgments", "query", "sensitivity",
    "AttributeKey", "AttributeModifier", "AttributeRule", "CombineRule",
    "DefinesRule", "EvidenceRule", "Finding", "ImpliesRule", "InstanceRule",
    "RuleBase", "SubsetRule", "ValidationReport",
    "dependency_graph", "effective_attributes", "parse_rulebase",
    "resolve_attribute", "serialize", "validate", "with_weight",
    "EvalEnv", "ProximityConfig", "TextExpr", "eval_expr", "render",
]
