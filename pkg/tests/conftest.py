"""Shared test fixtures for hashtag segmenter tests."""

import json
import logging
from collections.abc import Callable, Generator, Mapping, Sequence
from pathlib import Path

import pytest

from hashtag_segmenter.cache import get_cache
from hashtag_segmenter.logging_config import ROOT_LOGGER
from hashtag_segmenter.scoring import CorpusModel, CorpusScorer

# word<TAB>count lines used by the corpus fixtures
SAMPLE_COUNTS: dict[str, int] = {
    "aamir": 40,
    "khan": 90,
    "fangtasy": 45,
    "island": 80,
    "beam": 30,
    "search": 70,
    "vamos": 50,
    "equipo": 50,
    "hello": 100,
    "world": 100,
    "new": 150,
    "york": 60,
    "a": 300,
    "an": 200,
    "i": 250,
}


@pytest.fixture(autouse=True)
def reset_cache() -> Generator[None]:
    """Reset the score cache before each test to ensure test isolation."""
    cache = get_cache()
    cache.clear()
    yield
    cache.clear()


@pytest.fixture(autouse=True)
def propagate_logs() -> Generator[None]:
    """Let caplog see package records; setup_logging turns propagation off."""
    logger = logging.getLogger(ROOT_LOGGER)
    handlers, propagate, level = list(logger.handlers), logger.propagate, logger.level
    logger.propagate = True
    yield
    logger.handlers[:] = handlers
    logger.propagate = propagate
    logger.setLevel(level)


class TableScorer:
    """Scorer answering from a fixed text -> score table.

    Unknown texts get ``default`` minus a small per-word penalty so every
    candidate has a deterministic finite score. Every batch is recorded.
    """

    def __init__(
        self,
        table: Mapping[str, float] | None = None,
        default: float = -100.0,
        name: str = "table",
    ) -> None:
        self.table = dict(table or {})
        self.default = default
        self.name = name
        self.batches: list[list[str]] = []

    async def score_batch(self, texts: Sequence[str]) -> list[float]:
        self.batches.append(list(texts))
        return [self.table.get(t, self.default - 0.01 * t.count(" ")) for t in texts]

    @property
    def scored_texts(self) -> list[str]:
        return [t for batch in self.batches for t in batch]


class FunctionScorer:
    """Scorer computing each score with a plain function."""

    def __init__(self, func: Callable[[str], float], name: str = "function") -> None:
        self.func = func
        self.name = name
        self.calls = 0

    async def score_batch(self, texts: Sequence[str]) -> list[float]:
        self.calls += 1
        return [self.func(t) for t in texts]


class ScriptedTransport:
    """Transport replaying scripted responses for each exchange.

    Each script entry is either a response line, an exception to raise, or
    a callable turning the parsed request into a response object.
    """

    def __init__(self, script: Sequence[object], endpoint: str = "fake://endpoint") -> None:
        self.endpoint = endpoint
        self.script = list(script)
        self.requests: list[dict] = []
        self.closed = False

    async def exchange(self, payload: str) -> str:
        request = json.loads(payload)
        self.requests.append(request)
        step = self.script.pop(0) if len(self.script) > 1 else self.script[0]
        if isinstance(step, BaseException):
            raise step
        if callable(step):
            return json.dumps(step(request))
        return str(step)

    async def close(self) -> None:
        self.closed = True


def echo_scores(score: Callable[[str], float]) -> Callable[[dict], dict]:
    """Response factory answering a score request with ``score(text)`` per text."""
    return lambda request: {"id": request["id"], "scores": [score(t) for t in request["texts"]]}


@pytest.fixture
def corpus_model() -> CorpusModel:
    return CorpusModel(SAMPLE_COUNTS)


@pytest.fixture
def corpus_scorer(corpus_model: CorpusModel) -> CorpusScorer:
    return CorpusScorer(corpus_model)


@pytest.fixture
def corpus_file(tmp_path: Path) -> Path:
    path = tmp_path / "freq.tsv"
    path.write_text(
        "".join(f"{word}\t{count}\n" for word, count in SAMPLE_COUNTS.items()), encoding="utf-8"
    )
    return path


@pytest.fixture
def phrase_table_file(tmp_path: Path) -> Path:
    path = tmp_path / "phrases.tsv"
    path.write_text(
        "# Spanish to English fixture table\n"
        "gol\tgoal\n"
        "ya\tnow\n"
        "vamos equipo\tlet's go team\n",
        encoding="utf-8",
    )
    return path
