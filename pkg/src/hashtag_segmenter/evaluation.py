"""Gold data loading and segmentation metrics.

Two F1 flavors share one report type:

- ``span``: micro-averaged F1 over word spans, i.e. half-open character
  offsets ``(start, end)`` of every word in the unsegmented hashtag.
- ``boundary``: micro-averaged F1 over the positions of inserted spaces.

Accuracy is always the fraction of items whose prediction equals gold.
"""

from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Protocol, runtime_checkable

from hashtag_segmenter.exceptions import (
    GoldFileError,
    InvalidHashtagError,
    MetricInputError,
    SegmentationParseError,
)
from hashtag_segmenter.logging_config import get_logger
from hashtag_segmenter.models import MetricsReport, OracleReport
from hashtag_segmenter.segmentation import Hashtag, Segmentation, _fold_case, parse

logger = get_logger("evaluation")

Metric = Literal["span", "boundary"]
UnitFunction = Callable[[Segmentation], set[Any]]


@dataclass(frozen=True, slots=True)
class GoldPair:
    """A hashtag with its human segmentation.

    Attributes:
        hashtag: The unsegmented hashtag.
        gold: Gold segmentation over exactly the same characters.
    """

    hashtag: Hashtag
    gold: Segmentation

    def __post_init__(self) -> None:
        if self.gold.chars != self.hashtag.chars:
            raise ValueError(
                f"Gold {self.gold} does not segment hashtag {self.hashtag.chars!r}"
            )


@dataclass
class GoldDataset:
    """Pairs loaded from a gold file.

    Attributes:
        pairs: Valid pairs in file order.
        skipped: Malformed lines skipped in lenient mode.
        source: Path of the gold file.
    """

    pairs: list[GoldPair] = field(default_factory=list)
    skipped: int = 0
    source: str = ""

    @property
    def hashtags(self) -> list[Hashtag]:
        return [pair.hashtag for pair in self.pairs]

    @property
    def golds(self) -> list[Segmentation]:
        return [pair.gold for pair in self.pairs]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[GoldPair]:
        return iter(self.pairs)


def _parse_gold_line(line: str, line_number: int, path: str, lowercase: bool) -> GoldPair:
    raw_hashtag, sep, raw_gold = line.partition("\t")
    if not sep:
        raise GoldFileError("expected 'hashtag<TAB>gold segmentation'", line_number, path)
    try:
        hashtag = Hashtag.from_text(raw_hashtag, lowercase=lowercase)
    except InvalidHashtagError as e:
        raise GoldFileError(str(e), line_number, path) from e

    gold_text = raw_gold.strip().removeprefix("#")
    if lowercase:
        gold_text = _fold_case(gold_text)
    try:
        gold = parse(gold_text)
    except SegmentationParseError as e:
        raise GoldFileError(str(e), line_number, path) from e
    if gold.chars != hashtag.chars:
        raise GoldFileError(
            f"gold {gold_text!r} does not match the characters of {hashtag.chars!r}",
            line_number,
            path,
        )
    return GoldPair(hashtag, gold)


def load_gold(path: Path | str, lowercase: bool = True, strict: bool = False) -> GoldDataset:
    """Load a ``hashtag<TAB>gold segmentation`` file.

    Blank lines are ignored and a single leading ``#`` is stripped from
    either column.

    Args:
        path: UTF-8 gold file.
        lowercase: Fold case of both columns.
        strict: Raise on the first malformed line instead of skipping it.

    Returns:
        The loaded pairs and the number of skipped lines.

    Raises:
        GoldFileError: In strict mode, on a missing tab, an invalid hashtag,
            an unparsable gold segmentation or a character mismatch.
        OSError: If the file cannot be read.
    """
    dataset = GoldDataset(source=str(path))
    with open(path, encoding="utf-8") as f:
        for line_number, raw_line in enumerate(f, start=1):
            line = raw_line.rstrip("\r\n")
            if not line.strip():
                continue
            try:
                dataset.pairs.append(_parse_gold_line(line, line_number, str(path), lowercase))
            except GoldFileError as e:
                if strict:
                    raise
                logger.warning("Skipping gold line: %s", e)
                dataset.skipped += 1
    logger.info(
        "Loaded gold file: path=%s pairs=%d skipped=%d", path, len(dataset), dataset.skipped
    )
    return dataset


def word_spans(s: Segmentation) -> set[tuple[int, int]]:
    """Half-open character offsets of every word of a segmentation."""
    spans: set[tuple[int, int]] = set()
    start = 0
    for i, delimited in enumerate(s.delimiters, start=1):
        if delimited:
            spans.add((start, i))
            start = i
    spans.add((start, len(s.chars)))
    return spans


def boundary_positions(s: Segmentation) -> set[int]:
    """Character offsets at which a space was inserted."""
    return {i for i, delimited in enumerate(s.delimiters, start=1) if delimited}


def _ratio(matched: int, total: int, other_total: int) -> float:
    # with nothing to find and nothing proposed the item is perfect
    if total == 0:
        return 1.0 if other_total == 0 else 0.0
    return matched / total


def _check_aligned(pred: Sequence[Segmentation], gold: Sequence[Segmentation]) -> None:
    if len(pred) != len(gold):
        raise MetricInputError(f"{len(pred)} predictions for {len(gold)} gold items")
    if not gold:
        raise MetricInputError("Cannot compute metrics over an empty dataset")
    for i, (p, g) in enumerate(zip(pred, gold, strict=True)):
        if p.chars != g.chars:
            raise MetricInputError(
                f"Item {i}: prediction over {p.chars!r} but gold over {g.chars!r}"
            )


def _report(
    pred: Sequence[Segmentation],
    gold: Sequence[Segmentation],
    units: UnitFunction,
    metric: Metric,
) -> MetricsReport:
    _check_aligned(pred, gold)
    matched = predicted = gold_units = exact = 0
    for p, g in zip(pred, gold, strict=True):
        p_units, g_units = units(p), units(g)
        matched += len(p_units & g_units)
        predicted += len(p_units)
        gold_units += len(g_units)
        exact += p.delimiters == g.delimiters
    precision = _ratio(matched, predicted, gold_units)
    recall = _ratio(matched, gold_units, predicted)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=exact / len(gold),
        matched=matched,
        predicted=predicted,
        gold=gold_units,
        exact=exact,
        total=len(gold),
        metric=metric,
    )


def span_f1(pred: Sequence[Segmentation], gold: Sequence[Segmentation]) -> MetricsReport:
    """Micro-averaged word-span precision, recall and F1, plus exact-match accuracy.

    Args:
        pred: Predicted segmentations.
        gold: Gold segmentations, aligned with ``pred``.

    Returns:
        The metrics report.

    Raises:
        MetricInputError: On different lengths, an empty dataset, or an item
            whose prediction and gold cover different characters.
    """
    return _report(pred, gold, word_spans, "span")


def boundary_f1(pred: Sequence[Segmentation], gold: Sequence[Segmentation]) -> MetricsReport:
    """Micro-averaged boundary precision, recall and F1, plus exact-match accuracy.

    When neither predictions nor gold contain a single space, precision and
    recall are both 1.
    """
    return _report(pred, gold, boundary_positions, "boundary")


def compute_metrics(
    pred: Sequence[Segmentation],
    gold: Sequence[Segmentation],
    metric: Metric = "span",
) -> MetricsReport:
    """Dispatch to :func:`span_f1` or :func:`boundary_f1`."""
    if metric == "boundary":
        return boundary_f1(pred, gold)
    return span_f1(pred, gold)


@runtime_checkable
class RankedCandidates(Protocol):
    """Anything exposing its candidates best-first."""

    def ranked(self) -> list[Segmentation]: ...


def oracle_select(ranked: Sequence[Segmentation], gold: Segmentation, n: int) -> Segmentation:
    """Gold if it is among the ``n`` best candidates, otherwise the best candidate.

    Raises:
        MetricInputError: If ``ranked`` is empty or ``n < 1``.
    """
    if n < 1:
        raise MetricInputError(f"N must be >= 1, got {n}")
    if not ranked:
        raise MetricInputError("Cannot select from an empty candidate list")
    if gold in ranked[:n]:
        return gold
    return ranked[0]


def oracle_topn(
    candidates_per_item: Sequence[RankedCandidates | Sequence[Segmentation]],
    gold: Sequence[Segmentation],
    n: int,
    metric: Metric = "span",
) -> MetricsReport:
    """Oracle top-N metrics.

    Each item is evaluated as gold when gold is among its top ``n``
    candidates and as its top-1 candidate otherwise. ``n = 1`` reduces to the
    plain top-1 metrics.

    Args:
        candidates_per_item: Ranked candidates per item.
        gold: Gold segmentation per item.
        n: Number of top candidates searched for gold.
        metric: F1 flavor.

    Returns:
        Metrics over the oracle selections.

    Raises:
        MetricInputError: On misaligned inputs, an empty candidate list or ``n < 1``.
    """
    if len(candidates_per_item) != len(gold):
        raise MetricInputError(
            f"{len(candidates_per_item)} candidate lists for {len(gold)} gold items"
        )
    selections = []
    for item, g in zip(candidates_per_item, gold, strict=True):
        ranked = item.ranked() if isinstance(item, RankedCandidates) else list(item)
        selections.append(oracle_select(ranked, g, n))
    return compute_metrics(selections, gold, metric)


def oracle_report(
    candidates_per_item: Sequence[RankedCandidates | Sequence[Segmentation]],
    gold: Sequence[Segmentation],
    ns: Sequence[int],
    metric: Metric = "span",
) -> list[OracleReport]:
    """Oracle metrics for every N in ``ns``, ascending."""
    return [
        OracleReport(n=n, report=oracle_topn(candidates_per_item, gold, n, metric))
        for n in sorted(set(ns))
    ]


def format_report(report: MetricsReport, label: str) -> str:
    """One human-readable table row: label, P, R, F1 and accuracy in percent."""
    return (
        f"{label:<16} P={report.precision * 100:6.2f}  R={report.recall * 100:6.2f}  "
        f"F1={report.f1 * 100:6.2f}  Acc={report.accuracy * 100:6.2f}"
    )
