"""Hashtag segmentation beam search.

Starting from the unsegmented hashtag, every iteration ``t`` inserts one more
space into each candidate that gained its ``(t-1)``-th space in the previous
iteration, scores the new level together with the surviving candidates and
keeps the ``top_k`` best. Every node produced at iteration ``t`` therefore has
exactly ``t`` spaces.
"""

from dataclasses import dataclass

from hashtag_segmenter.config import DEFAULT_BEAM_WIDTH, DEFAULT_EXPANSIONS
from hashtag_segmenter.logging_config import get_logger
from hashtag_segmenter.scoring import Scorer, score_batch
from hashtag_segmenter.segmentation import (
    CandidateTree,
    Hashtag,
    ScoredCandidates,
    Segmentation,
    counts,
    generate,
    render,
)

logger = get_logger("beam_search")


@dataclass(frozen=True)
class BeamParams:
    """Beam search parameters.

    Attributes:
        e: Maximum number of expansions (search tree height). ``0`` scores the
            unsegmented hashtag only.
        top_k: Beam width.
    """

    e: int = DEFAULT_EXPANSIONS
    top_k: int = DEFAULT_BEAM_WIDTH

    def __post_init__(self) -> None:
        if self.e < 0:
            raise ValueError(f"e must be >= 0, got {self.e}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")

    def effective_expansions(self, n: int) -> int:
        """Expansions actually run for a hashtag of ``n`` characters.

        A hashtag has only ``n - 1`` delimiter slots, so ``e`` is clamped to that.
        """
        return min(self.e, n - 1)


def expand(tree: CandidateTree, t: int) -> CandidateTree:
    """Expand a tree level.

    Each node with at least ``t - 1`` spaces yields one child per empty
    delimiter slot, with that slot set to a space. Other nodes yield nothing.

    Args:
        tree: Current tree level.
        t: 1-based iteration index.

    Returns:
        The children, in node order then slot order. Duplicates are kept.

    Raises:
        ValueError: If ``t < 1``.
    """
    if t < 1:
        raise ValueError(f"Iteration index must be >= 1, got {t}")
    children: CandidateTree = []
    for node in tree:
        if counts(node) < t - 1:
            continue
        children.extend(
            node.with_delimiter(i) for i, delimited in enumerate(node.delimiters) if not delimited
        )
    return children


async def score(
    tree: CandidateTree,
    scorer: Scorer,
    cache: dict[str, float] | None = None,
) -> ScoredCandidates:
    """Score a tree level.

    Nodes are deduplicated by rendered text, and texts already present in
    ``cache`` are not sent to the scorer again. All distinct texts missing
    from the cache go out as one batch.

    Args:
        tree: Nodes to score.
        scorer: Any scorer.
        cache: Optional rendered-text to score map, updated in place.

    Returns:
        One entry per distinct candidate, best-first.

    Raises:
        EndpointError: Propagated from external scorers, with the batch attached.
    """
    if cache is None:
        cache = {}
    unique: dict[str, Segmentation] = {}
    for node in tree:
        unique.setdefault(render(node), node)
    missing = [text for text in unique if text not in cache]
    if missing:
        cache.update(zip(missing, await score_batch(scorer, missing), strict=True))
    return ScoredCandidates.from_pairs((node, cache[text]) for text, node in unique.items())


def prune(d: ScoredCandidates, top_k: int) -> CandidateTree:
    """Keep the ``top_k`` best-scored candidates as the next tree level."""
    return d.ranked()[:top_k]


async def hsbs(
    hashtag: Hashtag | str,
    params: BeamParams,
    scorer: Scorer,
) -> ScoredCandidates:
    """Segment a hashtag with beam search.

    The unsegmented candidate is always part of the result. If an
    iteration has no node left to expand, the search stops early and the
    result is flagged ``truncated``.

    Args:
        hashtag: The hashtag to segment.
        params: Beam parameters.
        scorer: Scorer ranking the candidates.

    Returns:
        The surviving candidates with their scores, best-first.

    Raises:
        InvalidHashtagError: If a raw string is not a legal hashtag.
        EndpointError: Propagated from external scorers.
    """
    root = generate(hashtag)
    expansions = params.effective_expansions(len(root.chars))

    cache: dict[str, float] = {}
    tree: CandidateTree = [root]
    truncated = False
    for t in range(1, expansions + 1):
        children = expand(tree, t)
        if not children:
            logger.warning(
                "Beam search stopped early: hashtag=%s iteration=%d of %d",
                root.chars,
                t,
                expansions,
            )
            truncated = True
            break
        tree = prune(await score(tree + children, scorer, cache), params.top_k)

    final = await score(tree + [root], scorer, cache)
    logger.debug(
        "Beam search done: hashtag=%s scored=%d kept=%d best=%s",
        root.chars,
        len(cache),
        len(final),
        final.best().text,
    )
    final.truncated = truncated
    return final

