"""Tests for re-ranking, the ensembler and the weight grid search."""

import random

import pytest

from hashtag_segmenter.ensemble import (
    DualScoredCandidate,
    DualScoredCandidates,
    EnsembleWeights,
    decision_value,
    ensemble,
    ensemble_decide,
    evaluate_grid,
    grid_search,
    rerank,
    tune,
)
from hashtag_segmenter.evaluation import GoldPair, compute_metrics
from hashtag_segmenter.exceptions import TuningError
from hashtag_segmenter.pipeline import SegmentationPipeline
from hashtag_segmenter.segmentation import ScoredCandidates, parse

from .conftest import TableScorer

GRID = [round(i * 0.05, 10) for i in range(21)]


def _pair(s1: float, r1: float | None, s2: float, r2: float | None) -> tuple:
    c1 = DualScoredCandidate(parse("ab c"), s1, r1)
    c2 = DualScoredCandidate(parse("a bc"), s2, r2)
    return c1, c2


def _fixture(reranker_knows_gold: bool, items: int = 50) -> tuple[list, list]:
    """Dev items whose Segmenter top-1 is wrong and Re-ranker top-1 is gold, or reversed."""
    candidates, gold = [], []
    for i in range(items):
        right = parse(f"go{i:02d} team")
        wrong = parse(f"go {i:02d}team")
        first, second = (wrong, right) if reranker_knows_gold else (right, wrong)
        candidates.append(
            DualScoredCandidates(
                entries=[
                    DualScoredCandidate(first, -1.0, -5.0),
                    DualScoredCandidate(second, -2.0, -1.0),
                    DualScoredCandidate(parse(f"g o{i:02d}team"), -9.0, -9.0),
                ],
                segmenter="seg",
                reranker="rr",
            )
        )
        gold.append(right)
    return candidates, gold


class TestEnsembleWeights:
    """Tests for EnsembleWeights."""

    def test_defaults(self) -> None:
        """Test that the default weights are alpha=0.2, beta=0.1."""
        w = EnsembleWeights()
        assert (w.alpha, w.beta) == (0.2, 0.1)

    @pytest.mark.parametrize(("alpha", "beta"), [(-0.1, 0.1), (0.2, 1.5)])
    def test_out_of_range(self, alpha: float, beta: float) -> None:
        """Test that weights outside [0, 1] are rejected."""
        with pytest.raises(ValueError):
            EnsembleWeights(alpha, beta)


class TestEnsembleDecide:
    """Tests for the two-candidate decision rule."""

    def test_decision_value(self) -> None:
        """Test that f_E = alpha*|ds| - beta*|ds'|."""
        c1, c2 = _pair(-1.0, -3.0, -2.0, -1.0)
        assert decision_value(c1, c2, EnsembleWeights(0.5, 0.25)) == pytest.approx(0.0)
        assert decision_value(c1, c2, EnsembleWeights(0.2, 0.1)) == pytest.approx(0.0)
        assert decision_value(c1, c2, EnsembleWeights(1.0, 0.0)) == pytest.approx(1.0)

    def test_non_negative_keeps_segmenter_order(self) -> None:
        """Test that f_E >= 0 keeps (c1, c2)."""
        c1, c2 = _pair(-1.0, -3.0, -2.0, -1.0)
        assert ensemble_decide(c1, c2, EnsembleWeights(0.5, 0.25)) == (c1, c2)

    def test_negative_orders_by_reranker(self) -> None:
        """Test that f_E < 0 orders the pair by Re-ranker score."""
        c1, c2 = _pair(-1.0, -3.0, -1.1, -1.0)
        assert ensemble_decide(c1, c2, EnsembleWeights(0.2, 0.1)) == (c2, c1)

    def test_negative_with_reranker_agreeing(self) -> None:
        """Test that f_E < 0 keeps c1 first when the Re-ranker also prefers it."""
        c1, c2 = _pair(-1.0, -1.0, -1.1, -3.0)
        assert ensemble_decide(c1, c2, EnsembleWeights(0.2, 0.1)) == (c1, c2)

    def test_single_candidate(self) -> None:
        """Test that a lone candidate is returned alone."""
        c1, _ = _pair(-1.0, -1.0, 0.0, 0.0)
        assert ensemble_decide(c1, None, EnsembleWeights()) == (c1,)

    def test_missing_reranker_score(self) -> None:
        """Test that the decision needs both Re-ranker scores."""
        c1, c2 = _pair(-1.0, None, -2.0, -1.0)
        with pytest.raises(ValueError):
            decision_value(c1, c2, EnsembleWeights())

    def test_randomized_contract(self) -> None:
        """Test the sign rule and the alpha=0 / beta=0 extremes on random quadruples."""
        rng = random.Random(99)
        for _ in range(10_000):
            s1 = rng.uniform(-50, 0)
            s2 = s1 - rng.uniform(0, 10)
            r1, r2 = rng.uniform(-50, 0), rng.uniform(-50, 0)
            c1, c2 = _pair(s1, r1, s2, r2)
            w = EnsembleWeights(rng.random(), rng.random())

            f = decision_value(c1, c2, w)
            decided = ensemble_decide(c1, c2, w)
            if f >= 0:
                assert decided == (c1, c2)
            else:
                assert decided == ((c2, c1) if r2 > r1 else (c1, c2))

            if r1 != r2:
                blind = ensemble_decide(c1, c2, EnsembleWeights(0.0, rng.uniform(0.01, 1.0)))
                assert blind == ((c2, c1) if r2 > r1 else (c1, c2))
            assert ensemble_decide(c1, c2, EnsembleWeights(rng.random(), 0.0)) == (c1, c2)


class TestRerankAndEnsemble:
    """Tests for rerank and ensemble."""

    async def test_rerank_keeps_order_and_adds_scores(self) -> None:
        """Test that rerank attaches s' without reordering."""
        scored = ScoredCandidates.from_pairs([(parse("ab c"), -1.0), (parse("a bc"), -2.0)])
        dual = await rerank(scored, TableScorer({"ab c": -7.0, "a bc": -3.0}, name="rr"), "seg")
        assert [e.text for e in dual] == ["ab c", "a bc"]
        assert [e.rerank_score for e in dual] == [-7.0, -3.0]
        assert dual.reranked
        assert (dual.segmenter, dual.reranker) == ("seg", "rr")

    async def test_rerank_empty(self) -> None:
        """Test that re-ranking nothing is an error."""
        with pytest.raises(ValueError):
            await rerank(ScoredCandidates(), TableScorer())

    def test_ensemble_only_touches_top_two(self) -> None:
        """Test that candidates below the top two keep Segmenter order."""
        candidates, _ = _fixture(reranker_knows_gold=True, items=1)
        ranked = ensemble(candidates[0], EnsembleWeights(0.0, 1.0))
        assert [c.text for c in ranked] == ["go00 team", "go 00team", "g o00team"]

    def test_ensemble_without_reranker(self) -> None:
        """Test that candidates that were never re-ranked keep Segmenter order."""
        scored = ScoredCandidates.from_pairs([(parse("ab c"), -1.0), (parse("a bc"), -2.0)])
        dual = DualScoredCandidates.from_scored(scored, "seg")
        assert [c.text for c in ensemble(dual, EnsembleWeights(0.0, 1.0))] == ["ab c", "a bc"]

    def test_transfer_maps_characters(self) -> None:
        """Test that transfer moves candidates onto the original casing."""
        scored = ScoredCandidates.from_pairs([(parse("beam search"), -1.0)])
        dual = DualScoredCandidates.from_scored(scored, "seg").transfer("BeamSearch")
        assert dual.entries[0].text == "Beam Search"


class TestEvaluateGrid:
    """Tests for the alpha/beta grid search."""

    def test_reranker_knows_gold(self) -> None:
        """Test that the search finds weights letting the Re-ranker win."""
        candidates, gold = _fixture(reranker_knows_gold=True)
        report = evaluate_grid(candidates, gold, GRID, GRID)
        assert report.f1 == 1.0
        assert (report.alpha, report.beta) == (0.0, 0.05)
        weights = EnsembleWeights(report.alpha, report.beta)
        predictions = [ensemble(c, weights)[0].segmentation for c in candidates]
        assert compute_metrics(predictions, gold).f1 == 1.0

    def test_segmenter_knows_gold(self) -> None:
        """Test that the search keeps Segmenter order when the Segmenter is right."""
        candidates, gold = _fixture(reranker_knows_gold=False)
        report = evaluate_grid(candidates, gold, GRID, GRID)
        assert report.f1 == 1.0
        assert (report.alpha, report.beta) == (0.0, 0.0)
        assert report.items == 50
        assert len(report.points) == len(GRID) ** 2

    def test_grid_order_is_sorted(self) -> None:
        """Test that unsorted grids are evaluated in ascending order."""
        candidates, gold = _fixture(reranker_knows_gold=True, items=3)
        report = evaluate_grid(candidates, gold, [1.0, 0.0], [0.5, 0.0])
        assert [(p.alpha, p.beta) for p in report.points] == [
            (0.0, 0.0),
            (0.0, 0.5),
            (1.0, 0.0),
            (1.0, 0.5),
        ]

    @pytest.mark.parametrize(("alphas", "betas"), [([], GRID), (GRID, [1.2])])
    def test_bad_grids(self, alphas: list[float], betas: list[float]) -> None:
        """Test that empty or out-of-range grids are rejected."""
        candidates, gold = _fixture(reranker_knows_gold=True, items=2)
        with pytest.raises(TuningError):
            evaluate_grid(candidates, gold, alphas, betas)

    def test_empty_dev(self) -> None:
        """Test that an empty dev set is rejected."""
        with pytest.raises(TuningError, match="Empty dev set"):
            evaluate_grid([], [], GRID, GRID)

    def test_misaligned(self) -> None:
        """Test that candidate and gold counts must match."""
        candidates, gold = _fixture(reranker_knows_gold=True, items=2)
        with pytest.raises(TuningError):
            evaluate_grid(candidates, gold[:1], GRID, GRID)

    def test_mixed_scorers(self) -> None:
        """Test that candidates from different scorer pairs are rejected."""
        candidates, gold = _fixture(reranker_knows_gold=True, items=2)
        candidates[1].reranker = "other"
        with pytest.raises(TuningError, match="different scorers"):
            evaluate_grid(candidates, gold, GRID, GRID)

    def test_not_reranked(self) -> None:
        """Test that candidates without Re-ranker scores are rejected."""
        candidates, gold = _fixture(reranker_knows_gold=True, items=2)
        for c in candidates:
            c.reranker = None
        with pytest.raises(TuningError, match="re-ranked"):
            evaluate_grid(candidates, gold, GRID, GRID)


class TestTune:
    """Tests for tune and grid_search over a pipeline."""

    @staticmethod
    def _dev() -> list[GoldPair]:
        return [GoldPair(parse(t).hashtag, parse(t)) for t in ("ab cd", "abc d", "a bcd")]

    async def test_tune_with_pipeline(self) -> None:
        """Test that tuning scores the dev set once and reports every point."""
        segmenter = TableScorer({"abcd": -1.0}, name="seg")
        reranker = TableScorer({"ab cd": 0.0, "abc d": 0.0, "a bcd": 0.0}, name="rr")
        pipeline = SegmentationPipeline(segmenter, reranker)
        report = await tune(self._dev(), pipeline, [0.0, 1.0], [0.0, 1.0])
        assert len(report.points) == 4
        assert report.items == 3
        assert 0.0 <= report.f1 <= 1.0

    async def test_grid_search_returns_weights(self) -> None:
        """Test that grid_search returns the selected weights."""
        segmenter = TableScorer(name="seg")
        reranker = TableScorer(name="rr")
        pipeline = SegmentationPipeline(segmenter, reranker)
        weights = await grid_search(self._dev(), pipeline, [0.0], [0.5])
        assert weights == EnsembleWeights(0.0, 0.5)

    async def test_tune_needs_reranker(self) -> None:
        """Test that tuning without a Re-ranker fails."""
        pipeline = SegmentationPipeline(TableScorer())
        with pytest.raises(TuningError, match="Re-ranker"):
            await tune(self._dev(), pipeline, GRID, GRID)

    async def test_tune_empty_dev(self) -> None:
        """Test that tuning on an empty dev set fails."""
        pipeline = SegmentationPipeline(TableScorer(), TableScorer(name="rr"))
        with pytest.raises(TuningError):
            await tune([], pipeline, GRID, GRID)
