from pathlib import Path

import pytest

from rubric import load_corpus, parse_rulebase, tokenize

DEMO_DIR = Path(__file__).resolve().parent.parent / "demo"


@pytest.fixture(scope="session")
def meetings_rules_path() -> Path:
    return DEMO_DIR / "meetings.rubric"


@pytest.fixture(scope="session")
def meetings_rules_text(meetings_rules_path) -> str:
    return meetings_rules_path.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def meetings_rb(meetings_rules_text):
    return parse_rulebase(meetings_rules_text)


@pytest.fixture(scope="session")
def demo_docs_dir() -> Path:
    return DEMO_DIR / "docs"


@pytest.fixture(scope="session")
def demo_corpus(demo_docs_dir):
    return load_corpus(demo_docs_dir)


@pytest.fixture(scope="session")
def demo_doc(demo_corpus):
    def get(doc_id: str):
        for d in demo_corpus:
            if d.doc_id == doc_id:
                return d
        raise KeyError(doc_id)

    return get


@pytest.fixture()
def doc_of():
    """Tokenize inline text as a one-off document."""

    def build(text: str, doc_id: str = "doc"):
        return tokenize(doc_id, text)

    return build
