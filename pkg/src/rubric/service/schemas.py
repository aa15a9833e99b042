"""Pydantic request/response models for the HTTP service."""

from pydantic import BaseModel, Field


class ProximityWindows(BaseModel):
    words: int = Field(default=10, ge=1)
    sentences: int = Field(default=3, ge=1)
    paragraphs: int = Field(default=2, ge=1)


class DocumentIn(BaseModel):
    doc_id: str
    text: str


class Finding(BaseModel):
    rule_id: int | None = None
    message: str


class ValidateRequest(BaseModel):
    rules: str


class ValidateResponse(BaseModel):
    ok: bool
    errors: list[Finding]
    warnings: list[Finding]


class ScoredDoc(BaseModel):
    doc: str
    score: float


class QueryRequest(BaseModel):
    rules: str
    documents: list[DocumentIn]
    concept: str
    threshold: float = Field(default=0.0, ge=0.0, le=1.0)
    top: int | None = Field(default=None, ge=1)
    proximity: ProximityWindows = ProximityWindows()


class QueryResponse(BaseModel):
    concept: str
    entries: list[ScoredDoc]


class ExplainRequest(BaseModel):
    rules: str
    document: DocumentIn
    concept: str
    proximity: ProximityWindows = ProximityWindows()


class ExplainResponse(BaseModel):
    concept: str
    doc: str
    value: float
    report: str


class EvalRequest(BaseModel):
    rules: str
    documents: list[DocumentIn]
    concept: str
    relevant: list[str]
    threshold: float = Field(default=0.0, ge=0.0, le=1.0)
    proximity: ProximityWindows = ProximityWindows()


class EvalResponse(BaseModel):
    recall: float
    precision: float
    retrieved: int
    relevant: int
    intersection: int
    unknown_ids: list[str]


class SensitivityRequest(BaseModel):
    rules: str
    documents: list[DocumentIn]
    concept: str
    rule_id: int = Field(ge=0)
    grid: list[float]
    threshold: float = Field(default=0.0, ge=0.0, le=1.0)
    top: int | None = Field(default=None, ge=1)
    proximity: ProximityWindows = ProximityWindows()


class SensitivityPointOut(BaseModel):
    weight: float
    entries: list[ScoredDoc]
    inversions: int


class SensitivityResponse(BaseModel):
    rule_id: int
    baseline: list[ScoredDoc]
    points: list[SensitivityPointOut]
