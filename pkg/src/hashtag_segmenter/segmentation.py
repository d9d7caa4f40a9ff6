"""Delimiter-slot representation of hashtags and their segmentations.

A hashtag ``H = <c1, ..., cn>`` is segmented by choosing, for every gap
between two characters, either no delimiter (``EPSILON``) or a space
(``BOX``). A ``Segmentation`` is the interleaved slot sequence
``<c1, d1, c2, ..., d(n-1), cn>``; only the delimiter slots ever change.
"""

from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from hashtag_segmenter.exceptions import InvalidHashtagError, SegmentationParseError

EPSILON = ""
BOX = " "


def _fold_case(text: str) -> str:
    # Only fold characters whose lowercase form is a single character, so
    # character offsets stay aligned with the original text.
    return "".join(lower if len(lower := c.lower()) == 1 else c for c in text)


@dataclass(frozen=True, slots=True)
class Hashtag:
    """A raw, unsegmented hashtag body.

    Attributes:
        chars: The hashtag characters, without the leading ``#``.
    """

    chars: str

    def __post_init__(self) -> None:
        if len(self.chars) < 2:
            raise InvalidHashtagError(
                f"Hashtag {self.chars!r} is too short: at least 2 characters are required"
            )
        if any(c.isspace() for c in self.chars):
            raise InvalidHashtagError(f"Hashtag {self.chars!r} contains whitespace")
        if self.chars.startswith("#"):
            raise InvalidHashtagError(
                f"Hashtag {self.chars!r} starts with '#'; use Hashtag.from_text to strip it"
            )

    @classmethod
    def from_text(cls, text: str, *, lowercase: bool = False) -> "Hashtag":
        """Build a hashtag from raw input, stripping one leading ``#``.

        Args:
            text: Raw hashtag text such as ``"#BeamSearch"``.
            lowercase: Fold case (offset-preserving).

        Returns:
            The hashtag.

        Raises:
            InvalidHashtagError: If the remaining body is not a legal hashtag.
        """
        body = text.strip()
        if body.startswith("#"):
            body = body[1:]
        if lowercase:
            body = _fold_case(body)
        return cls(body)

    def __len__(self) -> int:
        return len(self.chars)

    def __str__(self) -> str:
        return self.chars


@dataclass(frozen=True, slots=True)
class Segmentation:
    """A segmentation of a hashtag.

    Attributes:
        chars: The characters ``c1..cn`` of the source hashtag.
        delimiters: ``n - 1`` flags; ``delimiters[i]`` is True when the slot
            between ``chars[i]`` and ``chars[i + 1]`` holds a space.
    """

    chars: str
    delimiters: tuple[bool, ...]
    _text: str = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.delimiters) != len(self.chars) - 1:
            raise ValueError(
                f"Segmentation of {len(self.chars)} characters needs "
                f"{len(self.chars) - 1} delimiter slots, got {len(self.delimiters)}"
            )
        # cached rendered form
        text = "".join(
            c + BOX if d else c for c, d in zip(self.chars, self.delimiters, strict=False)
        )
        object.__setattr__(self, "_text", text + self.chars[-1:])

    @property
    def slots(self) -> tuple[str, ...]:
        """The interleaved slot sequence ``<c1, d1, ..., cn>`` of length ``2n - 1``."""
        out: list[str] = [self.chars[0]]
        for char, delimited in zip(self.chars[1:], self.delimiters, strict=True):
            out.append(BOX if delimited else EPSILON)
            out.append(char)
        return tuple(out)

    @property
    def hashtag(self) -> Hashtag:
        """The unsegmented hashtag these slots were generated from."""
        return Hashtag(self.chars)

    def with_delimiter(self, index: int) -> "Segmentation":
        """Return a copy with delimiter slot ``index`` (0-based) set to a space."""
        flags = list(self.delimiters)
        flags[index] = True
        return Segmentation(self.chars, tuple(flags))

    def transfer(self, chars: str) -> "Segmentation":
        """Apply these delimiter slots to another character sequence of equal length.

        Used to map a segmentation computed on case-folded text back onto the
        original characters.
        """
        if len(chars) != len(self.chars):
            raise ValueError(
                f"Cannot transfer a {len(self.chars)}-character segmentation onto "
                f"{len(chars)} characters"
            )
        return Segmentation(chars, self.delimiters)

    def words(self) -> list[str]:
        """The words delimited by the space slots."""
        return render(self).split(BOX)

    def __str__(self) -> str:
        return render(self)


# A tree level is realized as a plain list of nodes; duplicates are allowed.
CandidateTree = list[Segmentation]


@dataclass(frozen=True, slots=True)
class ScoredCandidate:
    """A segmentation with its score (natural log scale, higher is better)."""

    segmentation: Segmentation
    score: float

    @property
    def text(self) -> str:
        return render(self.segmentation)


def ranking_key(segmentation: Segmentation, score: float) -> tuple[float, int, str]:
    """Sort key for best-first order.

    Higher scores first; ties go to fewer delimiters, then to the
    lexicographically smaller rendered string.
    """
    return (-score, counts(segmentation), render(segmentation))


@dataclass(slots=True)
class ScoredCandidates:
    """Dictionary of scored segmentation candidates, kept best-first.

    Attributes:
        entries: One entry per distinct segmentation, ordered by
            :func:`ranking_key`.
        truncated: Set by beam search when an iteration had no node to
            expand and the search stopped early.
    """

    entries: list[ScoredCandidate] = field(default_factory=list)
    truncated: bool = False

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[Segmentation, float]],
        *,
        truncated: bool = False,
    ) -> "ScoredCandidates":
        """Build a dictionary from (segmentation, score) pairs.

        The first score seen for a rendered string wins; later duplicates
        are dropped.
        """
        seen: dict[str, ScoredCandidate] = {}
        for segmentation, score in pairs:
            key = render(segmentation)
            if key not in seen:
                seen[key] = ScoredCandidate(segmentation, score)
        entries = sorted(seen.values(), key=lambda c: ranking_key(c.segmentation, c.score))
        return cls(entries=entries, truncated=truncated)

    def ranked(self) -> list[Segmentation]:
        """Segmentations in best-first order."""
        return [entry.segmentation for entry in self.entries]

    def score_of(self, text: str) -> float | None:
        """Score of the candidate rendered as ``text``, if present."""
        for entry in self.entries:
            if entry.text == text:
                return entry.score
        return None

    def best(self) -> ScoredCandidate:
        """The top-ranked entry.

        Raises:
            IndexError: If the dictionary is empty.
        """
        return self.entries[0]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ScoredCandidate]:
        return iter(self.entries)

    def __contains__(self, text: object) -> bool:
        return any(entry.text == text for entry in self.entries)


def generate(hashtag: Hashtag | str) -> Segmentation:
    """Generate the all-epsilon segmentation of a hashtag.

    Args:
        hashtag: A Hashtag, or a raw string validated as one.

    Returns:
        A segmentation with ``2n - 1`` slots and no spaces.

    Raises:
        InvalidHashtagError: If a raw string is shorter than 2 characters or
            contains whitespace.
    """
    if not isinstance(hashtag, Hashtag):
        hashtag = Hashtag(hashtag)
    return Segmentation(hashtag.chars, (False,) * (len(hashtag.chars) - 1))


def length(segmentation: Segmentation) -> int:
    """Number of slots, characters and delimiters alike (``2n - 1``)."""
    return 2 * len(segmentation.chars) - 1


def counts(segmentation: Segmentation) -> int:
    """Number of delimiter slots holding a space."""
    return sum(segmentation.delimiters)


def render(segmentation: Segmentation) -> str:
    """Render slots as text: each space slot becomes one ASCII space."""
    return segmentation._text


def parse(text: str) -> Segmentation:
    """Parse spaced text back into a segmentation (inverse of :func:`render`).

    Args:
        text: Words separated by single ASCII spaces.

    Returns:
        The segmentation whose render is ``text``.

    Raises:
        SegmentationParseError: On leading/trailing or doubled spaces, other
            whitespace, or fewer than two characters.
    """
    if text.startswith(BOX) or text.endswith(BOX):
        raise SegmentationParseError(f"Leading or trailing space in {text!r}")
    words = text.split(BOX)
    if any(word == "" for word in words):
        raise SegmentationParseError(f"Empty word (double space) in {text!r}")
    if any(c.isspace() for word in words for c in word):
        raise SegmentationParseError(f"Non-space whitespace in {text!r}")
    chars = "".join(words)
    if len(chars) < 2:
        raise SegmentationParseError(f"{text!r} has fewer than 2 characters")

    flags: list[bool] = []
    for word in words:
        flags.extend([False] * (len(word) - 1))
        flags.append(True)
    flags.pop()  # no slot after the last character
    return Segmentation(chars, tuple(flags))


def all_segmentations(hashtag: Hashtag) -> Iterator[Segmentation]:
    """Enumerate all ``2^(n-1)`` segmentations of a hashtag.

    Intended for brute-force checks on short hashtags.
    """
    slots = len(hashtag.chars) - 1
    for mask in range(1 << slots):
        yield Segmentation(hashtag.chars, tuple(bool(mask >> i & 1) for i in range(slots)))
