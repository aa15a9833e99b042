"""HTTP facade over the retrieval engine.

Requests carry the rule text and documents inline, so the service holds no
state between calls and any number of clients can share one instance.
Scores are rounded to 6 decimals, matching the CLI output.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..corpus import Corpus, make_corpus, tokenize
from ..errors import (
    AmbiguousAttributeError,
    CorpusError,
    RuleParseError,
    UnknownConceptError,
    UnknownRuleError,
)
from ..inference import evaluate_concept, explain
from ..retrieval import effectiveness, query, sensitivity
from ..rulebase import RuleBase, parse_rulebase, validate
from ..trl import ProximityConfig
from . import schemas


def _parse_rules(text: str) -> RuleBase:
    try:
        return parse_rulebase(text)
    except RuleParseError as exc:
        detail = [{"line": line, "message": msg} for line, msg in exc.problems]
        raise HTTPException(status_code=400, detail=detail)


def _validated_rules(text: str) -> RuleBase:
    rb = _parse_rules(text)
    report = validate(rb)
    if report.errors:
        detail = [{"rule_id": f.rule_id, "message": f.message} for f in report.errors]
        raise HTTPException(status_code=400, detail=detail)
    return rb


def _corpus(documents: list[schemas.DocumentIn]) -> Corpus:
    try:
        return make_corpus(tokenize(d.doc_id, d.text) for d in documents)
    except CorpusError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def _proximity(p: schemas.ProximityWindows) -> ProximityConfig:
    return ProximityConfig(p.words, p.sentences, p.paragraphs)


def _entries(pairs) -> list[schemas.ScoredDoc]:
    return [schemas.ScoredDoc(doc=d, score=round(s, 6)) for d, s in pairs]


def create_app() -> FastAPI:
    app = FastAPI(
        title="rubric",
        version=__version__,
        description="Rule-based, explainable concept retrieval over plain text.",
    )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/validate", response_model=schemas.ValidateResponse)
    def validate_rules(req: schemas.ValidateRequest) -> schemas.ValidateResponse:
        try:
            rb = parse_rulebase(req.rules)
        except RuleParseError as exc:
            findings = [schemas.Finding(message=f"line {line}: {msg}") for line, msg in exc.problems]
            return schemas.ValidateResponse(ok=False, errors=findings, warnings=[])
        report = validate(rb)
        return schemas.ValidateResponse(
            ok=report.ok,
            errors=[schemas.Finding(rule_id=f.rule_id, message=f.message) for f in report.errors],
            warnings=[schemas.Finding(rule_id=f.rule_id, message=f.message) for f in report.warnings],
        )

    @app.post("/query", response_model=schemas.QueryResponse)
    def run_query(req: schemas.QueryRequest) -> schemas.QueryResponse:
        rb = _validated_rules(req.rules)
        corpus = _corpus(req.documents)
        try:
            result = query(req.concept.lower(), corpus, rb,
                           proximity=_proximity(req.proximity), threshold=req.threshold)
        except (UnknownConceptError, AmbiguousAttributeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        entries = result.entries[: req.top] if req.top else result.entries
        return schemas.QueryResponse(concept=result.concept, entries=_entries(entries))

    @app.post("/explain", response_model=schemas.ExplainResponse)
    def run_explain(req: schemas.ExplainRequest) -> schemas.ExplainResponse:
        rb = _validated_rules(req.rules)
        concept = req.concept.lower()
        if concept not in rb.concepts:
            raise HTTPException(status_code=400, detail=f"unknown concept '{req.concept}'")
        doc = tokenize(req.document.doc_id, req.document.text)
        try:
            value, trace = evaluate_concept(concept, doc, rb, proximity=_proximity(req.proximity))
        except AmbiguousAttributeError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return schemas.ExplainResponse(concept=concept, doc=doc.doc_id,
                                       value=round(value, 6), report=explain(trace))

    @app.post("/eval", response_model=schemas.EvalResponse)
    def run_eval(req: schemas.EvalRequest) -> schemas.EvalResponse:
        rb = _validated_rules(req.rules)
        corpus = _corpus(req.documents)
        try:
            result = query(req.concept.lower(), corpus, rb,
                           proximity=_proximity(req.proximity), threshold=req.threshold)
        except (UnknownConceptError, AmbiguousAttributeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        judged = set(req.relevant)
        eff = effectiveness(result, judged)
        return schemas.EvalResponse(
            recall=round(eff.recall, 6),
            precision=round(eff.precision, 6),
            retrieved=eff.retrieved,
            relevant=eff.relevant,
            intersection=eff.intersection,
            unknown_ids=sorted(judged - set(corpus.doc_ids)),
        )

    @app.post("/sensitivity", response_model=schemas.SensitivityResponse)
    def run_sensitivity(req: schemas.SensitivityRequest) -> schemas.SensitivityResponse:
        rb = _validated_rules(req.rules)
        corpus = _corpus(req.documents)
        try:
            report = sensitivity(req.rule_id, list(req.grid), req.concept.lower(), corpus, rb,
                                 proximity=_proximity(req.proximity),
                                 threshold=req.threshold, top=req.top)
        except (UnknownConceptError, UnknownRuleError, AmbiguousAttributeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return schemas.SensitivityResponse(
            rule_id=report.rule_id,
            baseline=_entries(report.baseline),
            points=[
                schemas.SensitivityPointOut(weight=p.weight, entries=_entries(p.entries),
                                            inversions=p.inversions)
                for p in report.points
            ],
        )

    return app


app = create_app()
