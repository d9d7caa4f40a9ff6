"""In-memory LRU cache for scores returned by external scorers."""

import threading
from collections import OrderedDict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from hashtag_segmenter.logging_config import get_logger
from hashtag_segmenter.scoring import Scorer

__all__ = [
    "CacheConfig",
    "CacheStats",
    "CachedScorer",
    "ScoreCache",
    "get_cache",
]

logger = get_logger("cache")


@dataclass
class CacheConfig:
    """Score cache configuration.

    Attributes:
        enabled: Whether caching is enabled.
        max_entries: Maximum number of cached scores.
    """

    enabled: bool = True
    max_entries: int = 100_000


@dataclass(frozen=True)
class CacheStats:
    """Snapshot of cache usage."""

    entries: int
    hits: int
    misses: int

    @property
    def hit_rate(self) -> float:
        lookups = self.hits + self.misses
        return self.hits / lookups if lookups else 0.0


class ScoreCache:
    """Thread-safe LRU cache of ``(scorer name, text) -> score``.

    Scores are deterministic per scorer, so entries never expire; the
    least-recently used entry is evicted once ``max_entries`` is reached.
    """

    def __init__(self, config: CacheConfig | None = None) -> None:
        self._config = config or CacheConfig()
        self._scores: OrderedDict[tuple[str, str], float] = OrderedDict()
        self._lock = threading.Lock()
        self._hits = 0
        self._misses = 0

    @property
    def enabled(self) -> bool:
        return self._config.enabled

    def lookup(self, scorer: str, texts: Sequence[str]) -> list[float | None]:
        """Cached scores of a batch, None where a text is missing.

        Args:
            scorer: Scorer name.
            texts: Candidate texts.

        Returns:
            One entry per text, aligned with ``texts``.
        """
        if not self._config.enabled:
            return [None] * len(texts)

        found: list[float | None] = []
        with self._lock:
            for text in texts:
                key = (scorer, text)
                score = self._scores.get(key)
                if score is None:
                    self._misses += 1
                else:
                    self._scores.move_to_end(key)
                    self._hits += 1
                found.append(score)
        return found

    def store(self, scorer: str, scores: Mapping[str, float]) -> None:
        """Cache the scores of one scorer, evicting least-recently used entries."""
        if not self._config.enabled:
            return

        with self._lock:
            for text, score in scores.items():
                key = (scorer, text)
                self._scores.pop(key, None)
                while len(self._scores) >= self._config.max_entries:
                    self._scores.popitem(last=False)
                self._scores[key] = score

    def clear(self) -> None:
        """Drop every entry and reset the statistics."""
        with self._lock:
            self._scores.clear()
            self._hits = self._misses = 0

    def stats(self) -> CacheStats:
        with self._lock:
            return CacheStats(entries=len(self._scores), hits=self._hits, misses=self._misses)


class CachedScorer:
    """Scorer wrapper that only forwards texts missing from the cache."""

    def __init__(self, inner: Scorer, cache: ScoreCache) -> None:
        self.inner = inner
        self.cache = cache
        self.name = inner.name

    async def score_batch(self, texts: Sequence[str]) -> list[float]:
        cached = self.cache.lookup(self.name, texts)
        missing = list(dict.fromkeys(t for t, s in zip(texts, cached, strict=True) if s is None))
        if not missing:
            return [s for s in cached if s is not None]

        fresh = dict(zip(missing, await self.inner.score_batch(missing), strict=True))
        self.cache.store(self.name, fresh)
        logger.debug(
            "Cache misses sent to scorer: scorer=%s missing=%d batch=%d",
            self.name,
            len(missing),
            len(texts),
        )
        return [fresh[t] if s is None else s for t, s in zip(texts, cached, strict=True)]

    async def close(self) -> None:
        close = getattr(self.inner, "close", None)
        if close is not None:
            await close()


_cache: ScoreCache | None = None
_cache_lock = threading.Lock()


def get_cache() -> ScoreCache:
    """Get or create the process-wide score cache.

    Uses double-checked locking; the configuration comes from settings.
    """
    global _cache
    if _cache is None:
        with _cache_lock:
            if _cache is None:
                from hashtag_segmenter.config import settings

                _cache = ScoreCache(
                    CacheConfig(
                        enabled=settings.cache_enabled,
                        max_entries=settings.cache_max_entries,
                    )
                )
    return _cache
