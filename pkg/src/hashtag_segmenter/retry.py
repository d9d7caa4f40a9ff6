"""Exponential backoff retries for external endpoint requests.

Only transport failures (timeouts, refused connections, dead processes) are
retried. Protocol violations mean the endpoint is broken, not busy, and
propagate immediately.
"""

import asyncio
import random
from collections.abc import Awaitable, Callable
from dataclasses import dataclass, field
from typing import TypeVar

from hashtag_segmenter.exceptions import EndpointTransportError
from hashtag_segmenter.logging_config import get_logger

T = TypeVar("T")

logger = get_logger("retry")


@dataclass
class RetryConfig:
    """Configuration for retry behavior with exponential backoff.

    Attributes:
        max_retries: Maximum number of retry attempts after the first try.
        base_delay: Initial delay in seconds before first retry.
        max_delay: Maximum delay in seconds between retries.
        exponential_base: Base for exponential backoff calculation.
        jitter: Random jitter factor (0.0 to 1.0) to add to delays.
    """

    max_retries: int = 2
    base_delay: float = 0.5
    max_delay: float = 8.0
    exponential_base: float = 2.0
    jitter: float = 0.1

    @classmethod
    def from_settings(cls) -> "RetryConfig":
        from hashtag_segmenter.config import settings

        return cls(
            max_retries=settings.retry_max_attempts,
            base_delay=settings.retry_base_delay,
            max_delay=settings.retry_max_delay,
        )


@dataclass
class Backoff:
    """Delay calculator for retry attempts.

    Attributes:
        config: RetryConfig with backoff parameters.
    """

    config: RetryConfig = field(default_factory=RetryConfig)

    def calculate_delay(self, attempt: int) -> float:
        """Calculate the delay before retry ``attempt`` (0-indexed).

        Returns:
            ``min(base * exponential_base**attempt, max_delay)`` plus up to
            ``jitter`` of that value at random.
        """
        exponential_delay = self.config.base_delay * (self.config.exponential_base**attempt)
        delay = min(exponential_delay, self.config.max_delay)
        return delay + delay * self.config.jitter * random.random()

    def should_retry(self, attempt: int) -> bool:
        return attempt < self.config.max_retries


async def with_retry(
    func: Callable[[], Awaitable[T]],
    *,
    config: RetryConfig | None = None,
    label: str = "endpoint",
) -> T:
    """Run an async request, retrying transport failures with backoff.

    ``func`` is re-invoked from scratch on every attempt, so each retry
    resends the whole batch.

    Args:
        func: Zero-argument coroutine factory performing one request.
        config: Optional RetryConfig; defaults come from settings.
        label: Endpoint name used in log messages.

    Returns:
        The result of the first successful attempt.

    Raises:
        EndpointTransportError: If every attempt failed in transport.
        Exception: Any other exception raised by ``func``, unretried.
    """
    if config is None:
        config = RetryConfig.from_settings()
    backoff = Backoff(config=config)

    attempt = 0
    while True:
        try:
            return await func()
        except EndpointTransportError as e:
            if not backoff.should_retry(attempt):
                logger.warning(
                    "%s failed after %d attempts, giving up: %s", label, attempt + 1, e
                )
                raise
            delay = backoff.calculate_delay(attempt)
            logger.info(
                "%s transport failure (%s), retrying in %.2f seconds (attempt %d/%d)",
                label,
                e,
                delay,
                attempt + 1,
                config.max_retries,
            )
            await asyncio.sleep(delay)
            attempt += 1
