"""Documents as word/sentence/paragraph position structures, plus the
pattern-occurrence and distance queries the expression evaluator needs."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusError

# Words are runs of letters/digits; internal apostrophes are kept so that
# possessives stay one token.  Hyphens and underscores separate words.
_WORD = re.compile(r"[^\W_]+(?:'[^\W_]+)*")
_PARA_BREAK = re.compile(r"\n[ \t\r]*\n")
_SENTENCE_END = ".!?"


@dataclass(frozen=True)
class Token:
    text: str
    word_index: int
    sentence_index: int
    paragraph_index: int


@dataclass(frozen=True)
class PatternOccurrence:
    start: int
    length: int


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple[Token, ...]
    raw: str
    postings: dict[str, tuple[int, ...]] = field(default_factory=dict, compare=False, repr=False)


@dataclass(frozen=True)
class Corpus:
    """Documents with unique ids, held in doc_id lexicographic order."""

    documents: tuple[Document, ...]

    def __iter__(self):
        return iter(self.documents)

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self.documents]


def split_words(text: str) -> list[str]:
    """Lowercased word list of ``text`` under the tokenizer's word rule."""
    return [m.group().lower() for m in _WORD.finditer(text)]


def tokenize(doc_id: str, raw: str) -> Document:
    """Split raw text into lowercase word tokens with position indices.

    A sentence ends at '.', '!' or '?' followed by whitespace; a paragraph
    ends at one or more blank lines, which also ends the current sentence.
    Boundaries with no words between them collapse (no empty sentences or
    paragraphs are counted).
    """
    tokens: list[Token] = []
    sentence = paragraph = 0
    prev_end: int | None = None
    for m in _WORD.finditer(raw):
        if prev_end is not None:
            gap = raw[prev_end : m.start()]
            if _PARA_BREAK.search(gap):
                paragraph += 1
                sentence += 1
            elif _gap_ends_sentence(gap):
                sentence += 1
        tokens.append(Token(m.group().lower(), len(tokens), sentence, paragraph))
        prev_end = m.end()
    postings: dict[str, list[int]] = {}
    for t in tokens:
        postings.setdefault(t.text, []).append(t.word_index)
    return Document(doc_id, tuple(tokens), raw, {w: tuple(ix) for w, ix in postings.items()})


def _gap_ends_sentence(gap: str) -> bool:
    # A terminator at the very end of the gap is followed by the next word
    # character, not whitespace, so it does not end a sentence ("U.S.").
    for k, ch in enumerate(gap):
        if ch in _SENTENCE_END and k + 1 < len(gap) and gap[k + 1].isspace():
            return True
    return False


def occurrences(doc: Document, pattern: Sequence[str]) -> list[PatternOccurrence]:
    """Every start position where the words of ``pattern`` appear consecutively.

    Matches may overlap.  Pattern words must already be lowercase.
    """
    if not pattern:
        raise ValueError("pattern must be nonempty")
    length = len(pattern)
    toks = doc.tokens
    out: list[PatternOccurrence] = []
    for start in doc.postings.get(pattern[0], ()):
        if start + length <= len(toks) and all(
            toks[start + k].text == pattern[k] for k in range(1, length)
        ):
            out.append(PatternOccurrence(start, length))
    return out


def distance(doc: Document, o1: PatternOccurrence, o2: PatternOccurrence, unit: str) -> int:
    """Distance between two occurrences in words, sentences, or paragraphs.

    Measured between the occurrences' first tokens.
    """
    if unit == "word":
        return abs(o1.start - o2.start)
    t1, t2 = doc.tokens[o1.start], doc.tokens[o2.start]
    if unit == "sentence":
        return abs(t1.sentence_index - t2.sentence_index)
    if unit == "paragraph":
        return abs(t1.paragraph_index - t2.paragraph_index)
    raise ValueError(f"unknown distance unit: {unit!r}")


def make_corpus(documents: Iterable[Document]) -> Corpus:
    """Corpus from documents, sorted by doc_id, rejecting duplicate ids."""
    docs = sorted(documents, key=lambda d: d.doc_id)
    seen: dict[str, str] = {}
    for d in docs:
        key = d.doc_id.lower()
        if key in seen:
            raise CorpusError(f"duplicate document id: {seen[key]!r} vs {d.doc_id!r}")
        seen[key] = d.doc_id
    return Corpus(tuple(docs))


def load_corpus(path: str | Path) -> Corpus:
    """Load every ``*.txt`` file under ``path`` as one document (id = file stem).

    The result is independent of filesystem enumeration order.
    """
    root = Path(path)
    try:
        entries = [p for p in root.iterdir() if p.is_file() and p.suffix == ".txt"]
    except OSError as exc:
        raise CorpusError(f"cannot list {root}: {exc}") from exc
    docs = []
    for p in entries:
        try:
            raw = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"cannot read {p.name}: {exc}") from exc
        docs.append(tokenize(p.stem, raw))
    return make_corpus(docs)
