"""S-expression reader for the rule file surface syntax.

Produces a small node tree (symbols, quoted strings, numbers, lists), each
node tagged with the 1-based source line it started on so later stages can
attach precise line numbers to diagnostics.  ``;`` starts a comment that runs
to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import RuleParseError


@dataclass(frozen=True)
class Sym:
    text: str
    line: int


@dataclass(frozen=True)
class Str:
    text: str
    line: int


@dataclass(frozen=True)
class Num:
    value: float
    line: int


@dataclass(frozen=True)
class SList:
    items: tuple["SNode", ...]
    line: int


SNode = Union[Sym, Str, Num, SList]

# Deliberately excludes "inf"/"nan", which float() would accept.
_NUMBER = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?$")
_DELIM = set(' \t\r\n();"')


def read_forms(source: str) -> list[SNode]:
    """Read every top-level form in ``source``.

    Raises RuleParseError for unbalanced parentheses or an unterminated
    string; those make the rest of the input unreadable.
    """
    forms: list[SNode] = []
    stack: list[tuple[list[SNode], int]] = []
    i, line = 0, 1
    n = len(source)

    def emit(node: SNode) -> None:
        if stack:
            stack[-1][0].append(node)
        else:
            forms.append(node)

    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
        elif ch in " \t\r":
            i += 1
        elif ch == ";":
            while i < n and source[i] != "\n":
                i += 1
        elif ch == "(":
            stack.append(([], line))
            i += 1
        elif ch == ")":
            if not stack:
                raise RuleParseError([(line, "unbalanced parentheses: unexpected ')'")])
            items, open_line = stack.pop()
            emit(SList(tuple(items), open_line))
            i += 1
        elif ch == '"':
            start = line
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    line += 1
                j += 1
            if j >= n:
                raise RuleParseError([(start, "unterminated string")])
            emit(Str(source[i + 1 : j], start))
            i = j + 1
        else:
            j = i
            while j < n and source[j] not in _DELIM:
                j += 1
            token = source[i:j]
            if _NUMBER.match(token):
                emit(Num(float(token), line))
            else:
                emit(Sym(token, line))
            i = j

    if stack:
        raise RuleParseError([(stack[-1][1], "unbalanced parentheses: missing ')'")])
    return forms
