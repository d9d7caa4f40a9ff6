"""Batch-scoring contract and the built-in corpus unigram scorer.

Any object with a ``name`` and an async ``score_batch(texts)`` returning one
finite float per text (natural log scale, higher is better) is a scorer.
Scores are only ever compared within one scorer.
"""

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, runtime_checkable

from hashtag_segmenter.exceptions import (
    ConfigError,
    CorpusFileError,
    NonFiniteScoreError,
    ResultCountMismatchError,
)
from hashtag_segmenter.logging_config import get_logger

logger = get_logger("scoring")

DEFAULT_DELTA = 0.5


@runtime_checkable
class Scorer(Protocol):
    """Batch-scoring contract shared by the Segmenter and the Re-ranker."""

    name: str

    async def score_batch(self, texts: Sequence[str]) -> list[float]:
        """Score texts; results are positionally aligned with the input."""
        ...


@dataclass(frozen=True)
class CorpusModel:
    """Additively smoothed unigram model over a word frequency table.

    ``p(w) = (count(w) + delta) / (total + delta * (V + 1))`` where ``V`` is
    the vocabulary size; unknown words get the ``delta``-only mass, so every
    probability lies in (0, 1].

    Attributes:
        counts: Word to occurrence count.
        delta: Smoothing mass, strictly positive.
    """

    counts: Mapping[str, int]
    delta: float = DEFAULT_DELTA
    total: int = field(init=False)
    _denominator: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if any(count <= 0 for count in self.counts.values()):
            raise ValueError("corpus counts must be positive integers")
        total = sum(self.counts.values())
        object.__setattr__(self, "total", total)
        object.__setattr__(
            self, "_denominator", total + self.delta * (len(self.counts) + 1)
        )

    @classmethod
    def from_file(cls, path: Path | str, delta: float = DEFAULT_DELTA) -> "CorpusModel":
        """Load a ``word<TAB>count`` frequency file.

        Blank lines are ignored. A word listed twice has its counts summed.

        Args:
            path: UTF-8 frequency file.
            delta: Smoothing mass.

        Returns:
            The loaded model.

        Raises:
            CorpusFileError: On a missing tab, empty word or non-positive count.
        """
        counts: dict[str, int] = {}
        with open(path, encoding="utf-8") as f:
            for line_number, raw_line in enumerate(f, start=1):
                line = raw_line.rstrip("\r\n")
                if not line.strip():
                    continue
                word, sep, raw_count = line.partition("\t")
                if not sep or not word:
                    raise CorpusFileError(
                        "expected 'word<TAB>count'", line_number, path=str(path)
                    )
                try:
                    count = int(raw_count.strip())
                except ValueError:
                    raise CorpusFileError(
                        f"count {raw_count!r} is not an integer", line_number, path=str(path)
                    ) from None
                if count <= 0:
                    raise CorpusFileError(
                        f"count must be positive, got {count}", line_number, path=str(path)
                    )
                counts[word] = counts.get(word, 0) + count
        logger.info("Loaded corpus: path=%s vocabulary=%d", path, len(counts))
        return cls(counts=counts, delta=delta)

    @property
    def vocabulary_size(self) -> int:
        return len(self.counts)

    def probability(self, word: str) -> float:
        """Smoothed unigram probability of a word."""
        return (self.counts.get(word, 0) + self.delta) / self._denominator

    def log_probability(self, word: str) -> float:
        return math.log(self.probability(word))


def corpus_score(model: CorpusModel, candidate: str) -> float:
    """Sum of smoothed log-probabilities of the space-separated words of a candidate."""
    return math.fsum(model.log_probability(word) for word in candidate.split(" "))


class CorpusScorer:
    """Deterministic built-in scorer backed by a :class:`CorpusModel`.

    Pure and immutable, so it is safe to share between concurrent searches.
    """

    def __init__(self, model: CorpusModel, name: str = "corpus") -> None:
        self.model = model
        self.name = name

    @classmethod
    def from_file(cls, path: Path | str, delta: float = DEFAULT_DELTA) -> "CorpusScorer":
        return cls(CorpusModel.from_file(path, delta), name=f"corpus:{path}")

    async def score_batch(self, texts: Sequence[str]) -> list[float]:
        return [corpus_score(self.model, text) for text in texts]


class LengthNormalizedScorer:
    """Wraps a scorer and divides each score by the candidate's word count."""

    def __init__(self, inner: Scorer) -> None:
        self.inner = inner
        self.name = f"{inner.name}/length-normalized"

    async def score_batch(self, texts: Sequence[str]) -> list[float]:
        scores = await self.inner.score_batch(texts)
        return [score / len(text.split(" ")) for score, text in zip(scores, texts, strict=True)]

    async def close(self) -> None:
        close = getattr(self.inner, "close", None)
        if close is not None:
            await close()


async def score_batch(scorer: Scorer, candidates: Sequence[str]) -> list[float]:
    """Score candidates and enforce the batch-scoring contract.

    Args:
        scorer: Any scorer.
        candidates: Non-empty candidate texts.

    Returns:
        One finite score per candidate, positionally aligned.

    Raises:
        ValueError: If a candidate is empty.
        ResultCountMismatchError: If the scorer returned the wrong number of scores.
        NonFiniteScoreError: If a score is NaN or infinite.
        EndpointError: Propagated from external scorers.
    """
    if not candidates:
        return []
    if any(not text for text in candidates):
        raise ValueError("Cannot score an empty candidate")
    scores = await scorer.score_batch(candidates)
    if len(scores) != len(candidates):
        raise ResultCountMismatchError(
            f"Scorer {scorer.name} returned {len(scores)} scores for {len(candidates)} texts",
            endpoint=scorer.name,
            batch=candidates,
        )
    bad = [i for i, score in enumerate(scores) if not math.isfinite(score)]
    if bad:
        raise NonFiniteScoreError(
            f"Scorer {scorer.name} returned non-finite scores at positions {bad}",
            endpoint=scorer.name,
            batch=candidates,
        )
    return list(scores)


def build_scorer(
    spec: str,
    *,
    delta: float = DEFAULT_DELTA,
    normalize_length: bool = False,
    timeout: float = 30.0,
    batch_size: int = 64,
) -> Scorer:
    """Build a scorer from a spec string.

    ``corpus:PATH`` builds the built-in unigram scorer; any other spec is
    treated as an external endpoint (``stdio:``, ``tcp://``, ``http(s)://``)
    and wrapped in the shared score cache.

    Args:
        spec: Scorer spec.
        delta: Smoothing mass of the built-in scorer.
        normalize_length: Wrap the scorer with length normalization.
        timeout: Endpoint request timeout in seconds.
        batch_size: Maximum texts per endpoint request.

    Returns:
        The scorer.

    Raises:
        ConfigError: If the spec is empty or has an unknown scheme.
        CorpusFileError: If a corpus file is malformed.
    """
    from hashtag_segmenter.cache import CachedScorer, get_cache
    from hashtag_segmenter.remote import RemoteScorer

    spec = spec.strip()
    if not spec:
        raise ConfigError("Empty scorer spec")

    scorer: Scorer
    if spec.startswith("corpus:"):
        path = spec.removeprefix("corpus:")
        try:
            scorer = CorpusScorer.from_file(path, delta=delta)
        except OSError as e:
            raise ConfigError(f"Cannot read corpus file '{path}': {e}") from e
    else:
        scorer = CachedScorer(
            RemoteScorer(spec, timeout=timeout, batch_size=batch_size), get_cache()
        )

    if normalize_length:
        scorer = LengthNormalizedScorer(scorer)
    return scorer
