"""Shared exception types."""

from __future__ import annotations


class RubricError(Exception):
    """Base class for all errors raised by this package."""


class RuleParseError(RubricError):
    """A rule file could not be parsed.

    ``problems`` holds one ``(line, message)`` pair per diagnostic, in source
    order.
    """

    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = list(problems)
        super().__init__("; ".join(f"line {line}: {msg}" for line, msg in self.problems))


class CorpusError(RubricError):
    """A corpus directory or document file could not be loaded."""


class UnknownConceptError(RubricError):
    """A query named a concept that no rule mentions."""


class UnknownRuleError(RubricError):
    """A rule id does not exist or cannot be used for the requested operation."""


class AmbiguousAttributeError(RubricError):
    """Two equally close rules bind the same attribute to different expressions."""

    def __init__(self, concept: str, attr: str, rule_ids: tuple[int, ...]):
        self.concept = concept
        self.attr = attr
        self.rule_ids = tuple(rule_ids)
        ids = ", ".join(str(i) for i in self.rule_ids)
        super().__init__(f"ambiguous binding for {concept}:{attr} (rules {ids})")


class CyclicDependencyError(RubricError):
    """Concept evaluation would recurse forever."""


class CombinerError(RubricError):
    """A combining-function name collides or cannot be resolved."""
