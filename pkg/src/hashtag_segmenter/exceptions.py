"""Custom exceptions for the hashtag segmenter."""

from collections.abc import Sequence


class HashtagSegmenterError(Exception):
    """Base exception for all hashtag segmenter errors."""

    pass


class InvalidHashtagError(HashtagSegmenterError, ValueError):
    """Raised when a string cannot be used as a hashtag.

    Hashtags need at least two characters and may not contain whitespace.
    """

    pass


class SegmentationParseError(HashtagSegmenterError, ValueError):
    """Raised when spaced text cannot be parsed into a segmentation.

    Leading, trailing and doubled spaces are rejected, as are texts with
    fewer than two characters.
    """

    pass


class _LineError(HashtagSegmenterError):
    """Base for errors that point at a line of an input file."""

    def __init__(self, message: str, line_number: int, path: str | None = None) -> None:
        """Initialize the error.

        Args:
            message: Description of what is wrong with the line.
            line_number: 1-based line number in the input file.
            path: Optional path of the offending file.
        """
        location = f"{path}:{line_number}" if path else f"line {line_number}"
        super().__init__(f"{location}: {message}")
        self.line_number = line_number
        self.path = path


class CorpusFileError(_LineError):
    """Raised when a corpus frequency file has a malformed line."""


class GoldFileError(_LineError):
    """Raised when a gold segmentation file has a malformed line.

    Covers missing tabs, unparsable gold segmentations and character
    mismatches between the hashtag and its gold segmentation.
    """


class MetricInputError(HashtagSegmenterError, ValueError):
    """Raised when predictions and gold data cannot be compared."""

    pass


class TuningError(HashtagSegmenterError):
    """Raised when the ensemble grid search cannot run (empty grid or dev set)."""

    pass


class ConfigError(HashtagSegmenterError):
    """Raised for invalid configuration files, keys, values or endpoint specs."""

    pass


class CodeMixError(HashtagSegmenterError):
    """Raised when a hashtag span of a tweet fails to segment or translate.

    Attributes:
        surface: The hashtag surface (including ``#``) that failed.
        start: Offset of the span in the tweet text.
    """

    def __init__(self, message: str, surface: str, start: int) -> None:
        """Initialize CodeMixError.

        Args:
            message: Error message describing the failure.
            surface: The hashtag surface that failed.
            start: Character offset of the span.
        """
        super().__init__(f"{message} (hashtag {surface!r} at offset {start})")
        self.surface = surface
        self.start = start


class EndpointError(HashtagSegmenterError):
    """Base exception for external scorer and translator endpoints.

    Attributes:
        endpoint: The endpoint spec the request was sent to.
        batch: The texts of the failing request, so callers can identify it.
    """

    def __init__(
        self,
        message: str,
        endpoint: str = "",
        batch: Sequence[str] | None = None,
    ) -> None:
        """Initialize EndpointError.

        Args:
            message: Error message.
            endpoint: Endpoint spec (e.g. ``tcp://localhost:9000``).
            batch: Texts of the failing request.
        """
        super().__init__(message)
        self.endpoint = endpoint
        self.batch: list[str] = list(batch or [])


class EndpointTransportError(EndpointError):
    """Raised when a request could not be delivered or answered.

    These errors are transient and retriable; the batch can be resent as-is.
    """

    pass


class EndpointTimeoutError(EndpointTransportError):
    """Raised when the endpoint does not answer within the configured timeout."""

    pass


class EndpointConnectionError(EndpointTransportError):
    """Raised when the endpoint refuses the connection or the process died."""

    pass


class EndpointUnavailableError(EndpointError):
    """Raised when the circuit breaker for an endpoint is open."""

    pass


class ProtocolError(EndpointError):
    """Raised when an endpoint answers with a response that breaks the wire contract.

    Protocol errors are never retried.
    """

    pass


class MalformedResponseError(ProtocolError):
    """Raised when a response line is not a valid JSON response object."""

    pass


class ResponseIdMismatchError(ProtocolError):
    """Raised when the response id differs from the request id."""

    def __init__(
        self,
        message: str,
        expected: int,
        received: int,
        endpoint: str = "",
        batch: Sequence[str] | None = None,
    ) -> None:
        """Initialize ResponseIdMismatchError.

        Args:
            message: Error message.
            expected: Id sent with the request.
            received: Id found in the response.
            endpoint: Endpoint spec.
            batch: Texts of the request.
        """
        super().__init__(message, endpoint=endpoint, batch=batch)
        self.expected = expected
        self.received = received


class ResultCountMismatchError(ProtocolError):
    """Raised when a response carries a different number of results than texts sent."""

    pass


class NonFiniteScoreError(ProtocolError):
    """Raised when a scorer returns NaN or an infinite score."""

    pass
