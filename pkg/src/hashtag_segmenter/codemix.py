"""Code-mixed translation of tweets with hashtags.

Three ways to send a tweet through a translator:

- ``t``: translate the tweet as-is.
- ``cmt``: segment every hashtag, translate the segmented words, glue the
  translation back into one ``#`` token and put it in place of the original
  hashtag; then translate the resulting code-mixed tweet.
- ``cmts``: like ``cmt``, then restore the spaces inside every glued hashtag
  found verbatim in the final translation.
"""

import asyncio
import re
import unicodedata
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Protocol

from tqdm.asyncio import tqdm

from hashtag_segmenter.exceptions import (
    CodeMixError,
    ConfigError,
    HashtagSegmenterError,
    ResultCountMismatchError,
)
from hashtag_segmenter.logging_config import get_logger
from hashtag_segmenter.models import HashtagRecord
from hashtag_segmenter.remote import RemoteTranslator

logger = get_logger("codemix")

Method = Literal["t", "cmt", "cmts"]

_HASHTAG_TOKEN = re.compile(r"(?<!\S)#\S+")
_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True, slots=True)
class HashtagSpan:
    """A hashtag occurrence in a tweet.

    Attributes:
        start: Offset of the ``#``.
        end: Offset just past the last hashtag character.
        surface: ``text[start:end]``, starting with ``#``.
    """

    start: int
    end: int
    surface: str

    @property
    def body(self) -> str:
        return self.surface[1:]


def _strip_trailing_punctuation(token: str) -> str:
    end = len(token)
    while end > 0 and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[:end]


def extract_hashtags(text: str) -> list[HashtagSpan]:
    """Find the hashtags of a text.

    A hashtag is a whitespace-delimited token starting with ``#``. Trailing
    punctuation is not part of it; tokens whose remaining body is shorter
    than two characters or contains another ``#`` are ignored.

    Args:
        text: Tweet text.

    Returns:
        Non-overlapping spans in text order.
    """
    spans: list[HashtagSpan] = []
    for match in _HASHTAG_TOKEN.finditer(text):
        surface = "#" + _strip_trailing_punctuation(match.group()[1:])
        body = surface[1:]
        if len(body) < 2 or "#" in body:
            continue
        spans.append(HashtagSpan(match.start(), match.start() + len(surface), surface))
    return spans


@dataclass(frozen=True)
class Tweet:
    """A tweet and its hashtag spans."""

    text: str
    hashtag_spans: tuple[HashtagSpan, ...] = ()

    @classmethod
    def from_text(cls, text: str) -> "Tweet":
        return cls(text, tuple(extract_hashtags(text)))


class Translator(Protocol):
    """Batch translation contract: outputs are aligned with inputs."""

    name: str

    async def translate_batch(self, texts: Sequence[str]) -> list[str]: ...


class HashtagSegmenter(Protocol):
    """Anything that turns a hashtag body into spaced words."""

    async def segment_text(self, text: str) -> str: ...


class IdentityTranslator:
    """Returns every text unchanged."""

    name = "identity"

    async def translate_batch(self, texts: Sequence[str]) -> list[str]:
        return list(texts)


class PhraseTableTranslator:
    """Dictionary-backed translator for offline runs and fixtures.

    A text found verbatim in the table is replaced by its entry. Otherwise
    every whitespace-separated token found in the table is replaced and all
    other tokens and the whitespace between them are kept.
    """

    def __init__(self, table: Mapping[str, str], name: str = "table") -> None:
        self.table = dict(table)
        self.name = name

    @classmethod
    def from_file(cls, path: Path | str) -> "PhraseTableTranslator":
        """Load a ``source<TAB>target`` file; blank lines and ``#`` comments are skipped.

        Raises:
            ConfigError: On a line without a tab.
        """
        table: dict[str, str] = {}
        with open(path, encoding="utf-8") as f:
            for line_number, raw_line in enumerate(f, start=1):
                line = raw_line.rstrip("\r\n")
                if not line.strip() or line.startswith("# "):
                    continue
                source, sep, target = line.partition("\t")
                if not sep:
                    raise ConfigError(f"{path}:{line_number}: expected 'source<TAB>target'")
                table[source.strip()] = target.strip()
        logger.info("Loaded phrase table: path=%s entries=%d", path, len(table))
        return cls(table, name=f"table:{path}")

    def translate(self, text: str) -> str:
        if text.strip() in self.table:
            return self.table[text.strip()]
        return _TOKEN.sub(lambda m: self.table.get(m.group(), m.group()), text)

    async def translate_batch(self, texts: Sequence[str]) -> list[str]:
        return [self.translate(text) for text in texts]


def build_translator(
    spec: str,
    *,
    src: str,
    tgt: str,
    timeout: float = 30.0,
    batch_size: int = 64,
) -> Translator:
    """Build a translator from ``identity``, ``table:PATH`` or an endpoint spec.

    Raises:
        ConfigError: On an unknown endpoint scheme or unreadable phrase table.
    """
    spec = spec.strip()
    if spec == "identity":
        return IdentityTranslator()
    if spec.startswith("table:"):
        path = spec.removeprefix("table:")
        try:
            return PhraseTableTranslator.from_file(path)
        except OSError as e:
            raise ConfigError(f"Cannot read phrase table '{path}': {e}") from e
    return RemoteTranslator(spec, src=src, tgt=tgt, timeout=timeout, batch_size=batch_size)


def rejoin(translation: str) -> str:
    """Glue a translated hashtag back into one ``#`` token (all whitespace removed)."""
    return "#" + "".join(translation.split())


def respace(translation: str) -> str:
    """``#`` followed by the translated words separated by single spaces."""
    return "#" + " ".join(translation.split())


@dataclass
class CodeMixResult:
    """Outcome of one tweet.

    Attributes:
        text: Final translated text (the original text if the tweet failed).
        code_mixed: Tweet with translated hashtags before the whole-tweet
            translation; None for method ``t``.
        records: One record per extracted hashtag.
        error: Failure message when the tweet fell back to its original text.
    """

    text: str
    code_mixed: str | None = None
    records: list[HashtagRecord] = field(default_factory=list)
    error: str | None = None


def _span_failed(
    record: HashtagRecord, span: HashtagSpan, error: Exception, strict: bool, stage: str
) -> None:
    if strict:
        raise CodeMixError(f"{stage} failed: {error}", span.surface, span.start) from error
    logger.warning(
        "Hashtag kept as-is: surface=%s start=%d stage=%s error=%s",
        span.surface,
        span.start,
        stage,
        error,
    )
    record.error = f"{stage}: {error}"


async def code_mix(
    tweet: Tweet,
    seg: HashtagSegmenter,
    tr: Translator,
    *,
    strict: bool = False,
    index: int = 0,
) -> tuple[str, list[HashtagRecord]]:
    """Replace every hashtag of a tweet by its glued translation.

    All hashtags of a tweet are translated in one batch. Substitutions are
    applied right to left so earlier offsets stay valid.

    Args:
        tweet: The tweet.
        seg: Hashtag segmenter.
        tr: Translator.
        strict: Raise instead of keeping a failed hashtag unchanged.
        index: Tweet index recorded in the hashtag records.

    Returns:
        The code-mixed text and one record per hashtag.

    Raises:
        CodeMixError: In strict mode, for the first hashtag that fails.
    """
    spans = tweet.hashtag_spans
    records = [HashtagRecord(tweet=index, surface=s.surface, start=s.start) for s in spans]

    for span, record in zip(spans, records, strict=True):
        try:
            record.segmented = await seg.segment_text(span.body)
        except HashtagSegmenterError as e:
            _span_failed(record, span, e, strict, "segmentation")

    pending = [i for i, record in enumerate(records) if record.segmented is not None]
    if pending:
        try:
            batch = [records[i].segmented or "" for i in pending]
            translations = await tr.translate_batch(batch)
            if len(translations) != len(batch):
                raise ResultCountMismatchError(
                    f"Translator returned {len(translations)} texts for {len(batch)} hashtags",
                    endpoint=getattr(tr, "name", ""),
                    batch=batch,
                )
        except HashtagSegmenterError as e:
            for i in pending:
                _span_failed(records[i], spans[i], e, strict, "translation")
            pending, translations = [], []
        for i, translation in zip(pending, translations, strict=True):
            record = records[i]
            record.translated = translation
            if not translation.split():
                _span_failed(
                    record, spans[i], ValueError("empty translation"), strict, "translation"
                )
                continue
            record.rejoined = rejoin(translation)
            record.spaced = respace(translation)

    text = tweet.text
    for span, record in sorted(
        zip(spans, records, strict=True), key=lambda pair: pair[0].start, reverse=True
    ):
        if record.rejoined is not None:
            text = text[: span.start] + record.rejoined + text[span.end :]
    return text, records


async def _translate_one(tr: Translator, text: str) -> str:
    if not text.strip():
        return text
    return (await tr.translate_batch([text]))[0]


def restore_spaces(text: str, records: Sequence[HashtagRecord]) -> str:
    """Put the spaces back into glued hashtags found verbatim in ``text``.

    A glued hashtag only matches when it is not followed by another word
    character. Records sharing a glued form are restored together and share
    the outcome. Records whose hashtag is missing are marked unmatched and
    the text is left as-is for them.
    """
    groups: dict[str, list[HashtagRecord]] = {}
    for record in records:
        if record.rejoined is not None and record.spaced is not None:
            groups.setdefault(record.rejoined, []).append(record)

    # longer tokens first so a short one never rewrites part of a longer one
    for rejoined in sorted(groups, key=len, reverse=True):
        group = groups[rejoined]
        spaced = group[0].spaced or rejoined
        pattern = re.compile(re.escape(rejoined) + r"(?!\w)")
        text, replaced = pattern.subn(lambda _m: spaced, text)
        for record in group:
            record.matched = replaced > 0
        if not replaced:
            logger.warning(
                "Translated hashtag not found in output: hashtag=%s tweet=%d records=%d",
                rejoined,
                group[0].tweet,
                len(group),
            )
    return text


async def translate_tweet(
    tweet: Tweet,
    method: Method,
    tr: Translator,
    seg: HashtagSegmenter | None = None,
    *,
    strict: bool = False,
    index: int = 0,
) -> CodeMixResult:
    """Translate one tweet with method ``t``, ``cmt`` or ``cmts``.

    Raises:
        ValueError: If a code-mixed method is requested without a segmenter.
        CodeMixError: In strict mode, when a hashtag fails.
        EndpointError: When the whole-tweet translation fails.
    """
    if method == "t":
        return CodeMixResult(text=await _translate_one(tr, tweet.text))
    if seg is None:
        raise ValueError(f"Method '{method}' needs a hashtag segmenter")

    code_mixed, records = await code_mix(tweet, seg, tr, strict=strict, index=index)
    text = await _translate_one(tr, code_mixed)
    if method == "cmts":
        text = restore_spaces(text, records)
    return CodeMixResult(text=text, code_mixed=code_mixed, records=records)


async def method_t(tweet: Tweet, tr: Translator) -> str:
    """Translate the tweet without touching its hashtags."""
    return (await translate_tweet(tweet, "t", tr)).text


async def method_cmt(tweet: Tweet, seg: HashtagSegmenter, tr: Translator) -> str:
    """Translate hashtags first, then the code-mixed tweet."""
    return (await translate_tweet(tweet, "cmt", tr, seg)).text


async def method_cmts(tweet: Tweet, seg: HashtagSegmenter, tr: Translator) -> str:
    """Code-mixed translation with spaces restored inside translated hashtags."""
    return (await translate_tweet(tweet, "cmts", tr, seg)).text


async def translate_tweets(
    texts: Sequence[str],
    method: Method,
    tr: Translator,
    seg: HashtagSegmenter | None = None,
    *,
    strict: bool = False,
    concurrency: int = 8,
    progress: bool = False,
) -> list[CodeMixResult]:
    """Translate many tweets concurrently; results keep input order.

    In lenient mode a tweet whose translation fails is emitted unchanged and
    its error is recorded on the result.

    Raises:
        HashtagSegmenterError: In strict mode, the first failure.
    """
    semaphore = asyncio.Semaphore(concurrency)

    async def one(index: int, text: str) -> CodeMixResult:
        async with semaphore:
            tweet = Tweet.from_text(text)
            try:
                return await translate_tweet(tweet, method, tr, seg, strict=strict, index=index)
            except HashtagSegmenterError as e:
                if strict:
                    raise
                logger.error("Tweet kept untranslated: tweet=%d error=%s", index, e)
                return CodeMixResult(text=text, error=str(e))

    return await tqdm.gather(
        *(one(i, text) for i, text in enumerate(texts)),
        desc=f"Translating ({method})",
        disable=not progress,
    )


def write_sidecar(path: Path, results: Sequence[CodeMixResult]) -> int:
    """Write every hashtag record as one JSON object per line.

    Returns:
        Number of records written.
    """
    records = [record for result in results for record in result.records]
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
    logger.info("Wrote sidecar: path=%s records=%d", path, len(records))
    return len(records)


def read_sidecar(path: Path) -> list[HashtagRecord]:
    """Read records written by :func:`write_sidecar`."""
    with open(path, encoding="utf-8") as f:
        return [HashtagRecord.model_validate_json(line) for line in f if line.strip()]
