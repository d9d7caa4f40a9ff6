"""Pydantic models for the wire protocol and machine-readable reports."""

import math

from pydantic import BaseModel, Field, field_validator


class ScoreRequest(BaseModel):
    """Scorer request envelope: ``{"id": <uint64>, "texts": [...]}``.

    Attributes:
        id: Request id, echoed back by the endpoint.
        texts: Candidate texts to score.
    """

    id: int = Field(ge=0, lt=2**64)
    texts: list[str]


class ScoreResponse(BaseModel):
    """Scorer response envelope: ``{"id": <uint64>, "scores": [...]}``.

    Attributes:
        id: Id of the request being answered.
        scores: One score per request text, natural log scale, higher is better.
    """

    id: int = Field(ge=0, lt=2**64)
    scores: list[float]

    @field_validator("scores", mode="before")
    @classmethod
    def reject_non_numbers(cls, v: object) -> object:
        # bools are ints in Python; a conforming scorer never sends them
        if isinstance(v, list) and any(isinstance(x, bool) for x in v):
            raise ValueError("scores must be numbers, not booleans")
        return v

    def non_finite_positions(self) -> list[int]:
        """Indices of NaN or infinite scores."""
        return [i for i, s in enumerate(self.scores) if not math.isfinite(s)]


class TranslateRequest(BaseModel):
    """Translator request envelope: ``{"id", "texts", "src", "tgt"}``.

    Attributes:
        id: Request id.
        texts: Texts to translate.
        src: Source language code.
        tgt: Target language code.
    """

    id: int = Field(ge=0, lt=2**64)
    texts: list[str]
    src: str
    tgt: str


class TranslateResponse(BaseModel):
    """Translator response envelope: ``{"id", "texts"}``.

    Attributes:
        id: Id of the request being answered.
        texts: Translations, aligned with the request texts.
    """

    id: int = Field(ge=0, lt=2**64)
    texts: list[str]


class MetricsReport(BaseModel):
    """Precision, recall, F1 and accuracy of a set of predictions.

    Attributes:
        precision: matched / predicted units.
        recall: matched / gold units.
        f1: Harmonic mean of precision and recall (0 when both are 0).
        accuracy: Exact matches / dataset size.
        matched: Units present in both prediction and gold.
        predicted: Units in the predictions.
        gold: Units in the gold data.
        exact: Items whose prediction equals gold.
        total: Number of items.
        metric: "span" (word spans) or "boundary" (delimiter positions).
    """

    precision: float = Field(ge=0.0, le=1.0)
    recall: float = Field(ge=0.0, le=1.0)
    f1: float = Field(ge=0.0, le=1.0)
    accuracy: float = Field(ge=0.0, le=1.0)
    matched: int = 0
    predicted: int = 0
    gold: int = 0
    exact: int = 0
    total: int = 0
    metric: str = "span"


class OracleReport(BaseModel):
    """Oracle top-N metrics for one N.

    Attributes:
        n: Number of top candidates searched for the gold segmentation.
        report: Metrics over the oracle selections.
    """

    n: int
    report: MetricsReport


class EvaluationReport(BaseModel):
    """Full evaluation of a gold file.

    Attributes:
        dataset: Path or name of the gold file.
        items: Number of evaluated items.
        skipped: Gold lines skipped in lenient mode.
        alpha: Ensemble weight used for the final ranking.
        beta: Ensemble weight used for the final ranking.
        final: Metrics of the final (ensembled) top-1.
        segmenter: Metrics of the Segmenter's own top-1.
        reranker_only: Metrics with alpha=0, beta=1 (blind re-ranking), if a
            Re-ranker is configured.
        oracle: Oracle metrics of the Segmenter ranking per N.
        truncated: Hashtags whose beam search stopped early.
    """

    dataset: str
    items: int
    skipped: int = 0
    alpha: float
    beta: float
    final: MetricsReport
    segmenter: MetricsReport
    reranker_only: MetricsReport | None = None
    oracle: list[OracleReport] = []
    truncated: int = 0


class GridPoint(BaseModel):
    """Score of one (alpha, beta) grid point on the dev set."""

    alpha: float
    beta: float
    f1: float
    accuracy: float


class TuningReport(BaseModel):
    """Record of an ensemble grid search.

    Attributes:
        alpha: Selected alpha.
        beta: Selected beta.
        f1: Dev F1 at the selected point.
        accuracy: Dev accuracy at the selected point.
        items: Dev set size.
        points: Every evaluated grid point, in evaluation order.
    """

    alpha: float
    beta: float
    f1: float
    accuracy: float
    items: int
    points: list[GridPoint] = []


class HashtagRecord(BaseModel):
    """Sidecar record of one hashtag processed by the code-mix pipeline.

    Attributes:
        tweet: 0-based index of the tweet in the input.
        surface: Original hashtag surface, including ``#``.
        start: Offset of the surface in the tweet.
        segmented: Segmented body, or None if segmentation failed.
        translated: Translation of the segmented body.
        rejoined: ``#`` + translation with all whitespace removed.
        spaced: ``#`` + translation with single spaces (CMTS restore form).
        matched: Whether CMTS found the rejoined hashtag in the final text
            (None when the method does not restore spaces).
        error: Failure message when the span fell back to its surface.
    """

    tweet: int = 0
    surface: str
    start: int
    segmented: str | None = None
    translated: str | None = None
    rejoined: str | None = None
    spaced: str | None = None
    matched: bool | None = None
    error: str | None = None
