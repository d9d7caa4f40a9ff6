"""Tests for hashtag extraction and the T / CMT / CMTS translation methods."""

from collections.abc import Sequence
from pathlib import Path

import pytest

from hashtag_segmenter.codemix import (
    CodeMixResult,
    IdentityTranslator,
    PhraseTableTranslator,
    Tweet,
    build_translator,
    code_mix,
    extract_hashtags,
    method_cmt,
    method_cmts,
    method_t,
    read_sidecar,
    rejoin,
    respace,
    restore_spaces,
    translate_tweet,
    translate_tweets,
    write_sidecar,
)
from hashtag_segmenter.exceptions import CodeMixError, ConfigError, EndpointTimeoutError
from hashtag_segmenter.models import HashtagRecord
from hashtag_segmenter.pipeline import SegmentationPipeline
from hashtag_segmenter.remote import RemoteTranslator
from hashtag_segmenter.scoring import CorpusScorer

FIXTURE_TWEETS = [
    "gol ya #vamosequipo",
    "#HelloWorld from #NewYork!",
    "no hashtags here",
    "",
    "a # lone hash and #x",
]


class _FailingTranslator:
    name = "failing"

    async def translate_batch(self, texts: Sequence[str]) -> list[str]:
        raise EndpointTimeoutError("translator down", endpoint="fake")


class _ShortTranslator:
    name = "short"

    async def translate_batch(self, texts: Sequence[str]) -> list[str]:
        return ["goal"][: len(texts) - 1]


class _EmptyTranslator:
    name = "empty"

    async def translate_batch(self, texts: Sequence[str]) -> list[str]:
        return ["" for _ in texts]


@pytest.fixture
def segmenter(corpus_scorer: CorpusScorer) -> SegmentationPipeline:
    return SegmentationPipeline(corpus_scorer)


@pytest.fixture
def table(phrase_table_file: Path) -> PhraseTableTranslator:
    return PhraseTableTranslator.from_file(phrase_table_file)


class TestExtractHashtags:
    """Tests for hashtag extraction."""

    def test_spans(self) -> None:
        """Test that hashtags are found with offsets and trailing punctuation removed."""
        spans = extract_hashtags("#HelloWorld from #NewYork!")
        assert [(s.start, s.end, s.surface) for s in spans] == [
            (0, 11, "#HelloWorld"),
            (17, 25, "#NewYork"),
        ]
        assert spans[1].body == "NewYork"

    @pytest.mark.parametrize("text", ["a # b", "#x", "mail#tag", "##double", "#a#b"])
    def test_not_hashtags(self, text: str) -> None:
        """Test that lone, short, embedded and doubled markers are ignored."""
        assert extract_hashtags(text) == []

    def test_tweet_from_text(self) -> None:
        """Test that Tweet.from_text records every span."""
        assert len(Tweet.from_text("#ab #cd").hashtag_spans) == 2


class TestRejoin:
    """Tests for rejoin and respace."""

    def test_rejoin_removes_all_whitespace(self) -> None:
        """Test that rejoin glues words behind one '#'."""
        assert rejoin("let's  go\tteam") == "#let'sgoteam"

    def test_respace_normalizes(self) -> None:
        """Test that respace keeps single spaces."""
        assert respace(" let's  go team ") == "#let's go team"


class TestPhraseTable:
    """Tests for the phrase-table translator."""

    async def test_exact_then_tokens(self, table: PhraseTableTranslator) -> None:
        """Test exact phrase lookup and per-token fallback."""
        assert await table.translate_batch(["vamos equipo", "gol  ya #x"]) == [
            "let's go team",
            "goal  now #x",
        ]

    def test_comment_skipped(self, table: PhraseTableTranslator) -> None:
        """Test that comment lines are not entries."""
        assert len(table.table) == 3

    def test_missing_tab(self, tmp_path: Path) -> None:
        """Test that a line without tab is a ConfigError."""
        path = tmp_path / "bad.tsv"
        path.write_text("gol goal\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            PhraseTableTranslator.from_file(path)

    def test_build_translator(self, phrase_table_file: Path, tmp_path: Path) -> None:
        """Test translator specs."""
        assert isinstance(build_translator("identity", src="es", tgt="en"), IdentityTranslator)
        table = build_translator(f"table:{phrase_table_file}", src="es", tgt="en")
        assert isinstance(table, PhraseTableTranslator)
        remote = build_translator("tcp://127.0.0.1:9", src="es", tgt="en")
        assert isinstance(remote, RemoteTranslator)
        with pytest.raises(ConfigError):
            build_translator(f"table:{tmp_path / 'missing.tsv'}", src="es", tgt="en")


class TestMethods:
    """Tests for T, CMT and CMTS."""

    async def test_identity_is_neutral(self, segmenter: SegmentationPipeline) -> None:
        """Test that identity translation leaves every fixture tweet unchanged."""
        tr = IdentityTranslator()
        for text in FIXTURE_TWEETS:
            tweet = Tweet.from_text(text)
            assert await method_t(tweet, tr) == text
            assert await method_cmt(tweet, segmenter, tr) == text

    async def test_cmts_with_identity_spaces_hashtags(
        self, segmenter: SegmentationPipeline
    ) -> None:
        """Test that CMTS with identity translation shows the segmentation."""
        tweet = Tweet.from_text("#HelloWorld from #NewYork!")
        result = await method_cmts(tweet, segmenter, IdentityTranslator())
        assert result == "#Hello World from #New York!"

    async def test_phrase_table_fixture(
        self, segmenter: SegmentationPipeline, table: PhraseTableTranslator
    ) -> None:
        """Test T, CMT and CMTS against hand-assembled outputs."""
        tweet = Tweet.from_text("gol ya #vamosequipo")
        assert await method_t(tweet, table) == "goal now #vamosequipo"
        assert await method_cmt(tweet, segmenter, table) == "goal now #let'sgoteam"
        assert await method_cmts(tweet, segmenter, table) == "goal now #let's go team"

    async def test_records(
        self, segmenter: SegmentationPipeline, table: PhraseTableTranslator
    ) -> None:
        """Test that every hashtag gets a complete, matched record."""
        result = await translate_tweet(
            Tweet.from_text("gol ya #vamosequipo"), "cmts", table, segmenter, index=4
        )
        assert result.code_mixed == "gol ya #let'sgoteam"
        (record,) = result.records
        assert record.tweet == 4
        assert record.surface == "#vamosequipo"
        assert record.segmented == "vamos equipo"
        assert record.translated == "let's go team"
        assert record.rejoined == "#let'sgoteam"
        assert record.spaced == "#let's go team"
        assert record.matched is True

    async def test_repeated_hashtag_all_matched(
        self, segmenter: SegmentationPipeline, table: PhraseTableTranslator
    ) -> None:
        """Test that every occurrence of a repeated hashtag is restored and matched."""
        result = await translate_tweet(
            Tweet.from_text("#vamosequipo y #vamosequipo"), "cmts", table, segmenter
        )
        assert result.text == "#let's go team y #let's go team"
        assert [r.matched for r in result.records] == [True, True]

    async def test_code_mixed_methods_need_segmenter(self) -> None:
        """Test that CMT without a segmenter is rejected."""
        with pytest.raises(ValueError):
            await translate_tweet(Tweet.from_text("#ab"), "cmt", IdentityTranslator())


class TestFailures:
    """Tests for failure handling in lenient and strict modes."""

    async def test_lenient_translation_failure_keeps_hashtag(
        self, segmenter: SegmentationPipeline
    ) -> None:
        """Test that a failed hashtag translation leaves the surface in place."""
        text, records = await code_mix(
            Tweet.from_text("ya #vamosequipo"), segmenter, _FailingTranslator()
        )
        assert text == "ya #vamosequipo"
        assert records[0].error is not None
        assert records[0].error.startswith("translation")

    async def test_strict_translation_failure(self, segmenter: SegmentationPipeline) -> None:
        """Test that strict mode raises CodeMixError with the span."""
        with pytest.raises(CodeMixError) as exc_info:
            await code_mix(
                Tweet.from_text("ya #vamosequipo"), segmenter, _FailingTranslator(), strict=True
            )
        assert exc_info.value.surface == "#vamosequipo"
        assert exc_info.value.start == 3

    async def test_empty_translation_is_failure(self, segmenter: SegmentationPipeline) -> None:
        """Test that an empty hashtag translation is not substituted."""
        text, records = await code_mix(
            Tweet.from_text("#vamosequipo"), segmenter, _EmptyTranslator()
        )
        assert text == "#vamosequipo"
        assert records[0].rejoined is None

    async def test_short_translation_batch_lenient(self, segmenter: SegmentationPipeline) -> None:
        """Test that a translator returning too few texts fails every hashtag of the tweet."""
        text, records = await code_mix(
            Tweet.from_text("#vamosequipo #newyork"), segmenter, _ShortTranslator()
        )
        assert text == "#vamosequipo #newyork"
        assert all(r.error is not None and r.rejoined is None for r in records)

    async def test_short_translation_batch_strict(self, segmenter: SegmentationPipeline) -> None:
        """Test that a short translation batch raises in strict mode."""
        with pytest.raises(CodeMixError):
            await code_mix(
                Tweet.from_text("#vamosequipo #newyork"),
                segmenter,
                _ShortTranslator(),
                strict=True,
            )

    async def test_translate_tweets_lenient(self, segmenter: SegmentationPipeline) -> None:
        """Test that a failing tweet falls back to its text and keeps order."""
        results = await translate_tweets(
            ["uno #vamosequipo", "   "], "t", _FailingTranslator(), segmenter
        )
        assert [r.text for r in results] == ["uno #vamosequipo", "   "]
        assert results[0].error is not None
        assert results[1].error is None

    async def test_translate_tweets_strict(self, segmenter: SegmentationPipeline) -> None:
        """Test that strict mode propagates the first failure."""
        with pytest.raises(EndpointTimeoutError):
            await translate_tweets(["uno"], "t", _FailingTranslator(), segmenter, strict=True)


class TestRestoreSpaces:
    """Tests for CMTS space restoration."""

    def test_unmatched_marked(self) -> None:
        """Test that a glued hashtag missing from the output is marked unmatched."""
        record = HashtagRecord(surface="#x", start=0, rejoined="#goteam", spaced="#go team")
        assert restore_spaces("the #go_team won", [record]) == "the #go_team won"
        assert record.matched is False

    def test_no_partial_word_match(self) -> None:
        """Test that a glued hashtag inside a longer token is not rewritten."""
        record = HashtagRecord(surface="#x", start=0, rejoined="#go", spaced="#g o")
        assert restore_spaces("#gone #go.", [record]) == "#gone #g o."

    def test_longer_first(self) -> None:
        """Test that longer glued hashtags are restored before shorter prefixes."""
        short = HashtagRecord(surface="#a", start=0, rejoined="#newyork", spaced="#new york")
        long = HashtagRecord(
            surface="#b", start=9, rejoined="#newyorkcity", spaced="#new york city"
        )
        text = restore_spaces("#newyork #newyorkcity", [short, long])
        assert text == "#new york #new york city"
        assert short.matched and long.matched

    def test_shared_glued_form(self) -> None:
        """Test that records with the same glued hashtag share one restoration."""
        first = HashtagRecord(surface="#a", start=0, rejoined="#goteam", spaced="#go team")
        second = HashtagRecord(surface="#a", start=10, rejoined="#goteam", spaced="#go team")
        text = restore_spaces("#goteam y #goteam", [first, second])
        assert text == "#go team y #go team"
        assert first.matched is True
        assert second.matched is True


class TestSidecar:
    """Tests for the per-hashtag JSON lines sidecar."""

    def test_write_and_read(self, tmp_path: Path) -> None:
        """Test that sidecar records load back."""
        records = [
            HashtagRecord(tweet=0, surface="#ab", start=0, segmented="a b", matched=True),
            HashtagRecord(tweet=1, surface="#cd", start=3, error="translation: down"),
        ]
        results = [
            CodeMixResult(text="x", records=records[:1]),
            CodeMixResult(text="y"),
            CodeMixResult(text="z", records=records[1:]),
        ]
        path = tmp_path / "side.jsonl"
        assert write_sidecar(path, results) == 2
        assert read_sidecar(path) == records
