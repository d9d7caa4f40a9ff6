"""Per-endpoint circuit breaker.

After ``failure_threshold`` consecutive transport failures the circuit opens
and requests fail fast with :class:`EndpointUnavailableError` until
``recovery_timeout`` has elapsed; then one probe request is let through.
"""

import asyncio
import time
from collections.abc import Awaitable, Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import TypeVar

from hashtag_segmenter.exceptions import EndpointTransportError, EndpointUnavailableError
from hashtag_segmenter.logging_config import get_logger

T = TypeVar("T")

__all__ = [
    "CircuitBreaker",
    "CircuitBreakerConfig",
    "CircuitState",
]

logger = get_logger("circuit_breaker")


class CircuitState(Enum):
    """Circuit breaker states."""

    CLOSED = "closed"
    OPEN = "open"
    HALF_OPEN = "half_open"


def _is_transport_failure(error: BaseException) -> bool:
    return isinstance(error, EndpointTransportError)


@dataclass
class CircuitBreakerConfig:
    """Configuration for circuit breaker behavior.

    Attributes:
        failure_threshold: Consecutive transport failures that open the circuit.
        recovery_timeout: Seconds an open circuit waits before probing.
        half_open_max_calls: Probe requests allowed while half-open.
    """

    failure_threshold: int = 5
    recovery_timeout: float = 30.0
    half_open_max_calls: int = 1

    @classmethod
    def from_settings(cls) -> "CircuitBreakerConfig":
        from hashtag_segmenter.config import settings

        return cls(
            failure_threshold=settings.circuit_failure_threshold,
            recovery_timeout=settings.circuit_recovery_timeout,
        )


@dataclass
class CircuitBreaker:
    """Circuit breaker guarding one external endpoint.

    Attributes:
        endpoint: Endpoint spec, used in errors and log messages.
        config: CircuitBreakerConfig with behavior settings.
        is_failure: Predicate deciding which exceptions count as failures.
            Defaults to transport errors only; protocol errors mean the
            endpoint answered, so they count as successes.
    """

    endpoint: str = ""
    config: CircuitBreakerConfig = field(default_factory=CircuitBreakerConfig)
    is_failure: Callable[[BaseException], bool] = _is_transport_failure
    _state: CircuitState = field(init=False, default=CircuitState.CLOSED)
    _failure_count: int = field(init=False, default=0)
    _opened_at: float = field(init=False, default=0.0)
    _probes: int = field(init=False, default=0)
    _lock: asyncio.Lock = field(init=False, default_factory=asyncio.Lock)

    @property
    def state(self) -> CircuitState:
        return self._state

    @property
    def failure_count(self) -> int:
        return self._failure_count

    async def call(self, func: Callable[[], Awaitable[T]]) -> T:
        """Run one endpoint request through the breaker.

        Args:
            func: Zero-argument coroutine factory performing the request.

        Returns:
            Result of func.

        Raises:
            EndpointUnavailableError: If the circuit is open, or half-open
                with its probe already in flight.
            Exception: Any exception from func.
        """
        async with self._lock:
            self._admit()
        try:
            result = await func()
        except Exception as e:
            await self._record(failed=self.is_failure(e))
            raise
        await self._record(failed=False)
        return result

    def _admit(self) -> None:
        if self._state == CircuitState.OPEN:
            waited = time.monotonic() - self._opened_at
            if waited < self.config.recovery_timeout:
                raise EndpointUnavailableError(
                    f"Circuit open for {self.endpoint}: endpoint appears to be down",
                    endpoint=self.endpoint,
                )
            logger.info("Circuit half-open: endpoint=%s waited=%.1fs", self.endpoint, waited)
            self._state = CircuitState.HALF_OPEN
            self._probes = 0

        if self._state == CircuitState.HALF_OPEN:
            if self._probes >= self.config.half_open_max_calls:
                raise EndpointUnavailableError(
                    f"Circuit half-open for {self.endpoint}: probe already in flight",
                    endpoint=self.endpoint,
                )
            self._probes += 1

    async def _record(self, failed: bool) -> None:
        async with self._lock:
            if not failed:
                if self._state == CircuitState.HALF_OPEN:
                    logger.info("Circuit closed: endpoint=%s probe succeeded", self.endpoint)
                self._state = CircuitState.CLOSED
                self._failure_count = 0
                return

            self._failure_count += 1
            if self._state == CircuitState.HALF_OPEN:
                self._trip("probe failed")
            elif self._failure_count >= self.config.failure_threshold:
                self._trip(f"{self._failure_count} consecutive failures")

    def _trip(self, reason: str) -> None:
        logger.warning("Circuit open: endpoint=%s reason=%s", self.endpoint, reason)
        self._state = CircuitState.OPEN
        self._opened_at = time.monotonic()

    def reset(self) -> None:
        """Close the circuit and forget past failures."""
        self._state = CircuitState.CLOSED
        self._failure_count = 0
        self._opened_at = 0.0
        self._probes = 0
