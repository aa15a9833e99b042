"""Command-line front end.

Thin wrappers over the engine: validate, query, explain, eval, sensitivity,
plus ``serve`` to run the HTTP service.  Results go to stdout, diagnostics to
stderr.  Exit codes: 0 success, 1 domain error (validation failure, unknown
concept or rule), 2 I/O or usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .corpus import load_corpus, tokenize
from .errors import (
    AmbiguousAttributeError,
    CorpusError,
    CyclicDependencyError,
    RuleParseError,
    UnknownConceptError,
    UnknownRuleError,
)
from .inference import evaluate_concept, explain as format_trace
from .retrieval import effectiveness, load_judgments, query as run_query, sensitivity as run_sensitivity
from .rulebase import format_weight, parse_rulebase, validate as validate_rules
from .trl import ProximityConfig

_DOMAIN_ERRORS = (UnknownConceptError, UnknownRuleError, AmbiguousAttributeError, CyclicDependencyError)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_rules(path: Path):
    try:
        source = path.read_text(encoding="utf-8")
    except OSError as exc:
        _fail(2, str(exc))
    try:
        return parse_rulebase(source)
    except RuleParseError as exc:
        for line, msg in exc.problems:
            click.echo(f"error: line {line}: {msg}", err=True)
        sys.exit(1)


def _checked_rules(path: Path):
    rb = _load_rules(path)
    report = validate_rules(rb)
    if report.errors:
        for f in report.errors:
            where = f" [rule {f.rule_id}]" if f.rule_id is not None else ""
            click.echo(f"error{where}: {f.message}", err=True)
        sys.exit(1)
    return rb


def _load_docs(path: Path):
    try:
        return load_corpus(path)
    except CorpusError as exc:
        _fail(2, str(exc))


def _proximity_options(fn):
    fn = click.option("--near-p", type=click.IntRange(min=1), default=2, show_default=True,
                      help="Paragraph window for NEAR-P.")(fn)
    fn = click.option("--near-s", type=click.IntRange(min=1), default=3, show_default=True,
                      help="Sentence window for NEAR-S.")(fn)
    fn = click.option("--near-w", type=click.IntRange(min=1), default=10, show_default=True,
                      help="Word window for NEAR-W.")(fn)
    return fn


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise click.BadParameter("grid must be start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise click.BadParameter("grid must be start:stop:step with numeric parts")
    if not (0.0 <= start <= stop <= 1.0) or step <= 0:
        raise click.BadParameter("grid requires 0 <= start <= stop <= 1 and step > 0")
    points: list[float] = []
    i = 0
    while True:
        v = round(start + i * step, 10)
        if v > stop + 1e-9:
            break
        points.append(min(v, stop))
        i += 1
    return points


_RULES_ARG = click.argument("rules", type=click.Path(exists=True, dir_okay=False, path_type=Path))
_CORPUS_ARG = click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))


@click.group()
@click.version_option(__version__)
def cli() -> None:
    """Rule-based, explainable concept retrieval over plain-text corpora."""


@cli.command()
@_RULES_ARG
def validate(rules: Path) -> None:
    """Parse and validate a rule file; exit 0 only when error-free."""
    try:
        source = rules.read_text(encoding="utf-8")
    except OSError as exc:
        _fail(2, str(exc))
    try:
        rb = parse_rulebase(source)
    except RuleParseError as exc:
        for line, msg in exc.problems:
            click.echo(f"error line {line}: {msg}")
        click.echo(f"{len(exc.problems)} errors, 0 warnings")
        sys.exit(1)
    report = validate_rules(rb)
    for f in report.errors:
        where = f" [rule {f.rule_id}]" if f.rule_id is not None else ""
        click.echo(f"error{where}: {f.message}")
    for f in report.warnings:
        where = f" [rule {f.rule_id}]" if f.rule_id is not None else ""
        click.echo(f"warning{where}: {f.message}")
    click.echo(f"{len(report.errors)} errors, {len(report.warnings)} warnings")
    sys.exit(0 if report.ok else 1)


@cli.command()
@_RULES_ARG
@_CORPUS_ARG
@click.argument("concept")
@click.option("--threshold", type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True,
              help="Keep only scores strictly above this value.")
@click.option("--top", type=click.IntRange(min=1), default=None, help="Keep only the K best entries.")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON array instead of TSV.")
@_proximity_options
def query(rules: Path, corpus_dir: Path, concept: str, threshold: float, top: int | None,
          as_json: bool, near_w: int, near_s: int, near_p: int) -> None:
    """Rank every document in CORPUS_DIR for CONCEPT."""
    rb = _checked_rules(rules)
    corpus = _load_docs(corpus_dir)
    prox = ProximityConfig(near_w, near_s, near_p)
    try:
        result = run_query(concept.lower(), corpus, rb, proximity=prox, threshold=threshold)
    except _DOMAIN_ERRORS as exc:
        _fail(1, str(exc))
    entries = result.entries[:top] if top else result.entries
    if as_json:
        click.echo(json.dumps([{"doc": d, "score": round(s, 6)} for d, s in entries]))
    else:
        for d, s in entries:
            click.echo(f"{d}\t{s:.6f}")


@cli.command()
@_RULES_ARG
@click.argument("document", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("concept")
@_proximity_options
def explain(rules: Path, document: Path, concept: str,
            near_w: int, near_s: int, near_p: int) -> None:
    """Show the full evaluation trace of CONCEPT over one document."""
    rb = _checked_rules(rules)
    try:
        raw = document.read_text(encoding="utf-8")
    except OSError as exc:
        _fail(2, str(exc))
    name = concept.lower()
    if name not in rb.concepts:
        _fail(1, f"unknown concept '{concept}'")
    doc = tokenize(document.stem, raw)
    prox = ProximityConfig(near_w, near_s, near_p)
    try:
        _, trace = evaluate_concept(name, doc, rb, proximity=prox)
    except _DOMAIN_ERRORS as exc:
        _fail(1, str(exc))
    click.echo(format_trace(trace), nl=False)


@cli.command("eval")
@_RULES_ARG
@_CORPUS_ARG
@click.argument("concept")
@click.option("--relevant", "relevant_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="File of judged-relevant doc ids, one per line.")
@click.option("--threshold", type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True)
@_proximity_options
def eval_cmd(rules: Path, corpus_dir: Path, concept: str, relevant_path: Path,
             threshold: float, near_w: int, near_s: int, near_p: int) -> None:
    """Recall and precision of a query against relevance judgments."""
    rb = _checked_rules(rules)
    corpus = _load_docs(corpus_dir)
    try:
        judged = load_judgments(relevant_path)
    except OSError as exc:
        _fail(2, str(exc))
    prox = ProximityConfig(near_w, near_s, near_p)
    try:
        result = run_query(concept.lower(), corpus, rb, proximity=prox, threshold=threshold)
    except _DOMAIN_ERRORS as exc:
        _fail(1, str(exc))
    for missing in sorted(judged - set(corpus.doc_ids)):
        click.echo(f"warning: relevant doc '{missing}' not in corpus", err=True)
    eff = effectiveness(result, judged)
    click.echo(f"recall {eff.recall:.6f} precision {eff.precision:.6f}")
    click.echo(f"retrieved {eff.retrieved} relevant {eff.relevant} intersection {eff.intersection}")


@cli.command()
@_RULES_ARG
@_CORPUS_ARG
@click.argument("concept")
@click.option("--rule", "rule_id", type=int, required=True, help="Id of the EVIDENCE/IMPLIES rule to sweep.")
@click.option("--grid", "grid_spec", required=True, help="Weight grid as start:stop:step.")
@click.option("--top", type=click.IntRange(min=1), default=None, help="Entries listed per grid point.")
@click.option("--threshold", type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True)
@_proximity_options
def sensitivity(rules: Path, corpus_dir: Path, concept: str, rule_id: int, grid_spec: str,
                top: int | None, threshold: float, near_w: int, near_s: int, near_p: int) -> None:
    """Sweep one rule weight across a grid and report ranking stability."""
    grid = _parse_grid(grid_spec)
    rb = _checked_rules(rules)
    corpus = _load_docs(corpus_dir)
    prox = ProximityConfig(near_w, near_s, near_p)
    try:
        report = run_sensitivity(rule_id, grid, concept.lower(), corpus, rb,
                                 proximity=prox, threshold=threshold, top=top)
    except _DOMAIN_ERRORS as exc:
        _fail(1, str(exc))
    for point in report.points:
        click.echo(f"weight {format_weight(point.weight)} inversions {point.inversions}")
        for d, s in point.entries:
            click.echo(f"{d}\t{s:.6f}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("rubric.service:app", host=host, port=port)


main = cli

if __name__ == "__main__":
    main()
