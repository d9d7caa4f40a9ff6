"""Production segmentation pipeline: beam search, re-ranking, ensembling."""

from hashtag_segmenter.beam_search import BeamParams, hsbs
from hashtag_segmenter.config import PipelineConfig
from hashtag_segmenter.ensemble import (
    DualScoredCandidate,
    DualScoredCandidates,
    EnsembleWeights,
    ensemble,
    rerank,
)
from hashtag_segmenter.logging_config import get_logger
from hashtag_segmenter.scoring import Scorer, build_scorer
from hashtag_segmenter.segmentation import Hashtag, Segmentation, _fold_case, render

logger = get_logger("pipeline")


class SegmentationPipeline:
    """Segments hashtags with a Segmenter, an optional Re-ranker and the ensembler.

    Case folding, when enabled, only affects what the scorers see: the
    returned segmentations are always over the original characters.

    Attributes:
        segmenter: Scorer driving the beam search.
        reranker: Optional second scorer.
        params: Beam search parameters.
        weights: Ensembler weights.
        lowercase: Fold case before scoring.
    """

    def __init__(
        self,
        segmenter: Scorer,
        reranker: Scorer | None = None,
        params: BeamParams | None = None,
        weights: EnsembleWeights | None = None,
        lowercase: bool = True,
    ) -> None:
        self.segmenter = segmenter
        self.reranker = reranker
        self.params = params or BeamParams()
        self.weights = weights or EnsembleWeights()
        self.lowercase = lowercase

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "SegmentationPipeline":
        """Build the scorers named in a configuration.

        Raises:
            ConfigError: If no segmenter is configured or a spec is invalid.
            CorpusFileError: If a corpus file is malformed.
        """
        common = {
            "delta": config.delta,
            "normalize_length": config.normalize_length,
            "timeout": config.timeout,
            "batch_size": config.batch_size,
        }
        segmenter = build_scorer(config.segmenter_spec, **common)
        reranker = build_scorer(config.reranker, **common) if config.reranker else None
        logger.info(
            "Pipeline ready: segmenter=%s reranker=%s e=%d top_k=%d alpha=%g beta=%g",
            segmenter.name,
            reranker.name if reranker else None,
            config.e,
            config.top_k_beam,
            config.alpha,
            config.beta,
        )
        return cls(
            segmenter,
            reranker,
            params=BeamParams(e=config.e, top_k=config.top_k_beam),
            weights=EnsembleWeights(config.alpha, config.beta),
            lowercase=config.lowercase,
        )

    async def candidates(self, hashtag: Hashtag | str) -> DualScoredCandidates:
        """Beam-search and, with a Re-ranker, re-rank the candidates of one hashtag.

        Args:
            hashtag: A Hashtag, or raw text with an optional leading ``#``.

        Returns:
            Candidates in Segmenter order over the original characters.

        Raises:
            InvalidHashtagError: If the text is not a legal hashtag.
            EndpointError: Propagated from external scorers.
        """
        original = hashtag if isinstance(hashtag, Hashtag) else Hashtag.from_text(hashtag)
        scored_on = Hashtag(_fold_case(original.chars)) if self.lowercase else original
        scored = await hsbs(scored_on, self.params, self.segmenter)
        if self.reranker is not None:
            dual = await rerank(scored, self.reranker, segmenter=self.segmenter.name)
        else:
            dual = DualScoredCandidates.from_scored(scored, self.segmenter.name)
        return dual.transfer(original.chars)

    def rank(
        self, dual: DualScoredCandidates, weights: EnsembleWeights | None = None
    ) -> list[DualScoredCandidate]:
        """Final order of a hashtag's candidates."""
        return ensemble(dual, weights or self.weights)

    async def segment(self, hashtag: Hashtag | str) -> Segmentation:
        """Best segmentation of one hashtag."""
        return self.rank(await self.candidates(hashtag))[0].segmentation

    async def segment_text(self, text: str) -> str:
        """Best segmentation of one hashtag body, rendered with spaces."""
        return render(await self.segment(text))

    async def close(self) -> None:
        """Release endpoint connections held by the scorers."""
        for scorer in (self.segmenter, self.reranker):
            close = getattr(scorer, "close", None)
            if close is not None:
                await close()
