"""Re-ranking and the two-candidate ensembler.

The Re-ranker attributes a second score ``s'`` to every candidate the
Segmenter kept. The ensembler then looks at the Segmenter's top two
candidates only and evaluates

    f_E = alpha * |s(c1) - s(c2)| - beta * |s'(c1) - s'(c2)|

A non-negative value keeps the Segmenter's order; a negative value orders
the pair by ``s'``. ``alpha`` and ``beta`` are grid-searched on a dev set.
"""

import asyncio
import itertools
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

from tqdm.asyncio import tqdm

from hashtag_segmenter.config import DEFAULT_ALPHA, DEFAULT_BETA
from hashtag_segmenter.evaluation import GoldPair, compute_metrics
from hashtag_segmenter.exceptions import TuningError
from hashtag_segmenter.logging_config import get_logger
from hashtag_segmenter.models import GridPoint, TuningReport
from hashtag_segmenter.scoring import Scorer, score_batch
from hashtag_segmenter.segmentation import ScoredCandidates, Segmentation, render

if TYPE_CHECKING:
    from hashtag_segmenter.pipeline import SegmentationPipeline

logger = get_logger("ensemble")


@dataclass(frozen=True, slots=True)
class DualScoredCandidate:
    """A candidate with its Segmenter score and, once re-ranked, its Re-ranker score."""

    segmentation: Segmentation
    score: float
    rerank_score: float | None = None

    @property
    def text(self) -> str:
        return render(self.segmentation)


@dataclass
class DualScoredCandidates:
    """Candidates forwarded by the Segmenter, in Segmenter order.

    Attributes:
        entries: The candidates, best Segmenter score first.
        segmenter: Name of the scorer that produced ``score``.
        reranker: Name of the scorer that produced ``rerank_score``, or None
            when the candidates were not re-ranked.
        truncated: Whether the beam search that produced them stopped early.
    """

    entries: list[DualScoredCandidate] = field(default_factory=list)
    segmenter: str = ""
    reranker: str | None = None
    truncated: bool = False

    @classmethod
    def from_scored(cls, scored: ScoredCandidates, segmenter: str) -> "DualScoredCandidates":
        """Wrap Segmenter output without Re-ranker scores."""
        return cls(
            entries=[DualScoredCandidate(c.segmentation, c.score) for c in scored],
            segmenter=segmenter,
            truncated=scored.truncated,
        )

    @property
    def reranked(self) -> bool:
        return self.reranker is not None

    def ranked(self) -> list[Segmentation]:
        """Segmentations in Segmenter order."""
        return [entry.segmentation for entry in self.entries]

    def transfer(self, chars: str) -> "DualScoredCandidates":
        """Map every candidate onto another character sequence of equal length."""
        return DualScoredCandidates(
            entries=[
                DualScoredCandidate(e.segmentation.transfer(chars), e.score, e.rerank_score)
                for e in self.entries
            ],
            segmenter=self.segmenter,
            reranker=self.reranker,
            truncated=self.truncated,
        )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[DualScoredCandidate]:
        return iter(self.entries)


@dataclass(frozen=True)
class EnsembleWeights:
    """Ensembler weights, both in ``[0, 1]``."""

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA

    def __post_init__(self) -> None:
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {value}")


async def rerank(
    top: ScoredCandidates,
    scorer_r: Scorer,
    segmenter: str = "",
) -> DualScoredCandidates:
    """Attribute a Re-ranker score to each of the Segmenter's candidates.

    Args:
        top: Segmenter output, best-first.
        scorer_r: The Re-ranker.
        segmenter: Name of the Segmenter, recorded on the result.

    Returns:
        The same candidates in the same order, each carrying both scores.

    Raises:
        ValueError: If ``top`` is empty.
        EndpointError: Propagated from external scorers.
    """
    if not len(top):
        raise ValueError("Cannot re-rank an empty candidate list")
    rerank_scores = await score_batch(scorer_r, [entry.text for entry in top])
    return DualScoredCandidates(
        entries=[
            DualScoredCandidate(entry.segmentation, entry.score, s_r)
            for entry, s_r in zip(top, rerank_scores, strict=True)
        ],
        segmenter=segmenter,
        reranker=scorer_r.name,
        truncated=top.truncated,
    )


def decision_value(
    c1: DualScoredCandidate, c2: DualScoredCandidate, weights: EnsembleWeights
) -> float:
    """Evaluate ``f_E`` for the Segmenter's top two candidates."""
    if c1.rerank_score is None or c2.rerank_score is None:
        raise ValueError("Both candidates need a Re-ranker score")
    return weights.alpha * abs(c1.score - c2.score) - weights.beta * abs(
        c1.rerank_score - c2.rerank_score
    )


def ensemble_decide(
    c1: DualScoredCandidate,
    c2: DualScoredCandidate | None,
    weights: EnsembleWeights,
) -> tuple[DualScoredCandidate, ...]:
    """Order the Segmenter's top two candidates.

    Args:
        c1: Segmenter's best candidate.
        c2: Segmenter's second candidate, or None if there is none.
        weights: Ensembler weights.

    Returns:
        ``(c1,)`` without a second candidate; ``(c1, c2)`` when
        ``f_E >= 0``; otherwise the pair ordered by Re-ranker score, keeping
        ``c1`` first when the Re-ranker scores are equal.
    """
    if c2 is None:
        return (c1,)
    if decision_value(c1, c2, weights) >= 0:
        return (c1, c2)
    assert c1.rerank_score is not None and c2.rerank_score is not None
    return (c2, c1) if c2.rerank_score > c1.rerank_score else (c1, c2)


def ensemble(dual: DualScoredCandidates, weights: EnsembleWeights) -> list[DualScoredCandidate]:
    """Final ranking: the decided top pair, then the rest in Segmenter order.

    Candidates without Re-ranker scores keep Segmenter order.
    """
    entries = list(dual.entries)
    if len(entries) < 2 or not dual.reranked:
        return entries
    return [*ensemble_decide(entries[0], entries[1], weights), *entries[2:]]


def _check_grid(name: str, grid: Iterable[float]) -> list[float]:
    values = sorted(set(grid))
    if not values:
        raise TuningError(f"Empty {name} grid")
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise TuningError(f"{name} grid values must lie within [0, 1]")
    return values


def evaluate_grid(
    candidates: Sequence[DualScoredCandidates],
    gold: Sequence[Segmentation],
    alpha_grid: Iterable[float],
    beta_grid: Iterable[float],
    metric: Literal["span", "boundary"] = "span",
) -> TuningReport:
    """Score every (alpha, beta) grid point on pre-computed dev candidates.

    The best point maximizes F1 of the ensembled top-1; ties go to the
    smaller alpha, then the smaller beta.

    Args:
        candidates: Re-ranked candidates per dev item.
        gold: Gold segmentation per dev item.
        alpha_grid: Alpha values in ``[0, 1]``.
        beta_grid: Beta values in ``[0, 1]``.
        metric: F1 flavor.

    Returns:
        The selected point and every evaluated grid point.

    Raises:
        TuningError: On an empty grid or dev set, misaligned inputs,
            candidates that were not re-ranked, or candidates produced by
            different scorers.
    """
    alphas = _check_grid("alpha", alpha_grid)
    betas = _check_grid("beta", beta_grid)
    if not candidates:
        raise TuningError("Empty dev set")
    if len(candidates) != len(gold):
        raise TuningError(f"{len(candidates)} candidate lists for {len(gold)} gold items")
    tags = {(c.segmenter, c.reranker) for c in candidates}
    if len(tags) != 1:
        raise TuningError(f"Dev candidates come from different scorers: {sorted(map(str, tags))}")
    if any(not c.reranked for c in candidates):
        raise TuningError("Grid search needs re-ranked candidates")
    if any(not len(c) for c in candidates):
        raise TuningError("A dev item has no candidates")

    points: list[GridPoint] = []
    best: GridPoint | None = None
    for alpha, beta in itertools.product(alphas, betas):
        weights = EnsembleWeights(alpha, beta)
        predictions = [ensemble(dual, weights)[0].segmentation for dual in candidates]
        report = compute_metrics(predictions, gold, metric=metric)
        point = GridPoint(alpha=alpha, beta=beta, f1=report.f1, accuracy=report.accuracy)
        points.append(point)
        if best is None or point.f1 > best.f1:
            best = point

    assert best is not None
    logger.info(
        "Grid search done: points=%d alpha=%g beta=%g f1=%.4f",
        len(points),
        best.alpha,
        best.beta,
        best.f1,
    )
    return TuningReport(
        alpha=best.alpha,
        beta=best.beta,
        f1=best.f1,
        accuracy=best.accuracy,
        items=len(candidates),
        points=points,
    )


async def collect_candidates(
    dev: Sequence[GoldPair],
    pipeline: "SegmentationPipeline",
    concurrency: int = 8,
    progress: bool = False,
) -> list[DualScoredCandidates]:
    """Run the Segmenter and Re-ranker once per dev hashtag, in dev order."""
    semaphore = asyncio.Semaphore(concurrency)

    async def one(pair: GoldPair) -> DualScoredCandidates:
        async with semaphore:
            return await pipeline.candidates(pair.hashtag)

    return await tqdm.gather(
        *(one(pair) for pair in dev), desc="Scoring dev set", disable=not progress
    )


async def tune(
    dev: Sequence[GoldPair],
    pipeline: "SegmentationPipeline",
    alpha_grid: Iterable[float],
    beta_grid: Iterable[float],
    metric: Literal["span", "boundary"] = "span",
    concurrency: int = 8,
    progress: bool = False,
) -> TuningReport:
    """Grid-search the ensembler weights on a dev set and report every point.

    Candidates are scored once per dev hashtag and reused for all grid points.

    Raises:
        TuningError: On an empty grid or dev set, or a pipeline without Re-ranker.
    """
    alphas = _check_grid("alpha", alpha_grid)
    betas = _check_grid("beta", beta_grid)
    if not dev:
        raise TuningError("Empty dev set")
    if pipeline.reranker is None:
        raise TuningError("Grid search needs a Re-ranker")
    candidates = await collect_candidates(dev, pipeline, concurrency, progress)
    return evaluate_grid(candidates, [pair.gold for pair in dev], alphas, betas, metric)


async def grid_search(
    dev: Sequence[GoldPair],
    pipeline: "SegmentationPipeline",
    alpha_grid: Iterable[float],
    beta_grid: Iterable[float],
    metric: Literal["span", "boundary"] = "span",
) -> EnsembleWeights:
    """Return the (alpha, beta) pair maximizing dev F1 of the ensembled top-1."""
    report = await tune(dev, pipeline, alpha_grid, beta_grid, metric)
    return EnsembleWeights(report.alpha, report.beta)
