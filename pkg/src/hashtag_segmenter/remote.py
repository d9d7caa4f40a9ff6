"""Client side of the newline-delimited JSON endpoint protocol.

External scorers and translators speak the same envelope: one UTF-8 JSON
object per line, ``{"id": <uint64>, "texts": [...]}`` answered by an object
carrying the same id. Three transports are supported:

- ``stdio:COMMAND``: spawn a process, write to its stdin, read its stdout.
- ``tcp://HOST:PORT``: one persistent stream connection.
- ``http://...`` / ``https://...``: one POST per request, JSON body back.
"""

import asyncio
import contextlib
import itertools
import json
import shlex
from collections.abc import Sequence
from typing import Any, Protocol
from urllib.parse import urlsplit

import httpx
from pydantic import BaseModel, ValidationError

from hashtag_segmenter.circuit_breaker import CircuitBreaker, CircuitBreakerConfig
from hashtag_segmenter.exceptions import (
    ConfigError,
    EndpointConnectionError,
    EndpointTimeoutError,
    EndpointTransportError,
    MalformedResponseError,
    NonFiniteScoreError,
    ProtocolError,
    ResponseIdMismatchError,
    ResultCountMismatchError,
)
from hashtag_segmenter.logging_config import get_logger
from hashtag_segmenter.models import (
    ScoreRequest,
    ScoreResponse,
    TranslateRequest,
    TranslateResponse,
)
from hashtag_segmenter.retry import RetryConfig, with_retry

logger = get_logger("remote")

if hasattr(itertools, "batched"):
    _batched = itertools.batched
else:  # Python < 3.12

    def _batched(iterable, n):
        it = iter(iterable)
        while batch := tuple(itertools.islice(it, n)):
            yield batch


UINT64_MASK = 2**64 - 1
STREAM_LIMIT = 2**24
DEFAULT_TIMEOUT = 30.0
DEFAULT_BATCH_SIZE = 64


class Transport(Protocol):
    """Carries one request line to an endpoint and returns its response line."""

    endpoint: str

    async def exchange(self, payload: str) -> str:
        """Send one JSON request (no trailing newline) and return the raw response."""
        ...

    async def close(self) -> None: ...


class _StreamTransport:
    """Shared logic of the stream transports: one in-flight request at a time.

    A request that times out or breaks the stream tears the connection down,
    so a late response can never be read as the answer to the next request.
    """

    def __init__(self, endpoint: str, timeout: float) -> None:
        self.endpoint = endpoint
        self.timeout = timeout
        self._reader: asyncio.StreamReader | None = None
        self._writer: asyncio.StreamWriter | None = None
        self._lock = asyncio.Lock()

    async def _open(self) -> tuple[asyncio.StreamReader, asyncio.StreamWriter]:
        raise NotImplementedError

    async def _reset(self) -> None:
        writer, self._reader, self._writer = self._writer, None, None
        if writer is not None:
            writer.close()
            with contextlib.suppress(Exception):
                await writer.wait_closed()

    async def _roundtrip(self, payload: str) -> str:
        if self._reader is None or self._writer is None:
            self._reader, self._writer = await self._open()
        self._writer.write(payload.encode("utf-8") + b"\n")
        await self._writer.drain()
        line = await self._reader.readline()
        if not line:
            raise EndpointConnectionError(
                f"{self.endpoint} closed the stream", endpoint=self.endpoint
            )
        return line.decode("utf-8")

    async def exchange(self, payload: str) -> str:
        async with self._lock:
            try:
                return await asyncio.wait_for(self._roundtrip(payload), self.timeout)
            except (TimeoutError, asyncio.TimeoutError):
                await self._reset()
                raise EndpointTimeoutError(
                    f"{self.endpoint} did not answer within {self.timeout:g}s",
                    endpoint=self.endpoint,
                ) from None
            except EndpointConnectionError:
                await self._reset()
                raise
            except (OSError, ValueError, asyncio.IncompleteReadError) as e:
                # ValueError: response line longer than the stream limit
                await self._reset()
                raise EndpointConnectionError(
                    f"{self.endpoint} stream failed: {e}", endpoint=self.endpoint
                ) from e

    async def close(self) -> None:
        async with self._lock:
            await self._reset()


class StdioTransport(_StreamTransport):
    """Talks to a spawned process over its stdin and stdout.

    The process is started lazily and restarted if it has exited.
    """

    def __init__(self, command: str, timeout: float = DEFAULT_TIMEOUT) -> None:
        super().__init__(f"stdio:{command}", timeout)
        self.argv = shlex.split(command)
        if not self.argv:
            raise ConfigError("stdio endpoint needs a command")
        self._process: asyncio.subprocess.Process | None = None

    async def _open(self) -> tuple[asyncio.StreamReader, asyncio.StreamWriter]:
        try:
            process = await asyncio.create_subprocess_exec(
                *self.argv,
                stdin=asyncio.subprocess.PIPE,
                stdout=asyncio.subprocess.PIPE,
                limit=STREAM_LIMIT,
            )
        except OSError as e:
            raise EndpointConnectionError(
                f"Cannot start {self.endpoint}: {e}", endpoint=self.endpoint
            ) from e
        logger.info("Started endpoint process: endpoint=%s pid=%d", self.endpoint, process.pid)
        self._process = process
        assert process.stdout is not None and process.stdin is not None
        return process.stdout, process.stdin

    async def _reset(self) -> None:
        await super()._reset()
        process, self._process = self._process, None
        if process is not None and process.returncode is None:
            try:
                await asyncio.wait_for(process.wait(), 5.0)
            except (TimeoutError, asyncio.TimeoutError):
                process.kill()
                await process.wait()


class TcpTransport(_StreamTransport):
    """Talks to a server over one persistent TCP connection."""

    def __init__(self, host: str, port: int, timeout: float = DEFAULT_TIMEOUT) -> None:
        super().__init__(f"tcp://{host}:{port}", timeout)
        self.host = host
        self.port = port

    async def _open(self) -> tuple[asyncio.StreamReader, asyncio.StreamWriter]:
        try:
            return await asyncio.open_connection(self.host, self.port, limit=STREAM_LIMIT)
        except OSError as e:
            raise EndpointConnectionError(
                f"Cannot connect to {self.endpoint}: {e}", endpoint=self.endpoint
            ) from e


class HttpTransport:
    """POSTs each request as a JSON body and reads the JSON response body.

    HTTP requests are independent, so concurrent exchanges need no lock.
    """

    def __init__(
        self,
        url: str,
        timeout: float = DEFAULT_TIMEOUT,
        client: httpx.AsyncClient | None = None,
    ) -> None:
        self.endpoint = url
        self.timeout = timeout
        self._client = client

    def _get_client(self) -> httpx.AsyncClient:
        if self._client is None or self._client.is_closed:
            self._client = httpx.AsyncClient(
                headers={"Accept": "application/json", "Content-Type": "application/json"},
                timeout=httpx.Timeout(self.timeout),
            )
        return self._client

    async def exchange(self, payload: str) -> str:
        client = self._get_client()
        try:
            response = await client.post(self.endpoint, content=payload.encode("utf-8"))
        except httpx.TimeoutException as e:
            raise EndpointTimeoutError(
                f"{self.endpoint} timed out: {e}", endpoint=self.endpoint
            ) from e
        except httpx.TransportError as e:
            raise EndpointConnectionError(
                f"Cannot reach {self.endpoint}: {e}", endpoint=self.endpoint
            ) from e

        logger.debug(
            "Endpoint response: endpoint=%s status=%d", self.endpoint, response.status_code
        )
        if response.status_code >= 500:
            raise EndpointTransportError(
                f"{self.endpoint} server error ({response.status_code})", endpoint=self.endpoint
            )
        if response.status_code >= 400:
            raise ProtocolError(
                f"{self.endpoint} rejected the request ({response.status_code}): {response.text}",
                endpoint=self.endpoint,
            )
        return response.text

    async def close(self) -> None:
        if self._client is not None and not self._client.is_closed:
            await self._client.aclose()
            self._client = None


def parse_endpoint(spec: str, timeout: float = DEFAULT_TIMEOUT) -> Transport:
    """Build the transport for an endpoint spec.

    Args:
        spec: ``stdio:COMMAND``, ``tcp://HOST:PORT``, ``http://URL`` or ``https://URL``.
        timeout: Per-request timeout in seconds.

    Returns:
        An unconnected transport; connections are opened on first use.

    Raises:
        ConfigError: If the scheme is unknown or the address incomplete.
    """
    spec = spec.strip()
    if spec.startswith("stdio:"):
        return StdioTransport(spec.removeprefix("stdio:").strip(), timeout=timeout)
    if spec.startswith("tcp://"):
        parts = urlsplit(spec)
        try:
            port = parts.port
        except ValueError as e:
            raise ConfigError(f"Invalid port in endpoint '{spec}'") from e
        if not parts.hostname or port is None:
            raise ConfigError(f"Endpoint '{spec}' needs tcp://HOST:PORT")
        return TcpTransport(parts.hostname, port, timeout=timeout)
    if spec.startswith(("http://", "https://")):
        return HttpTransport(spec, timeout=timeout)
    raise ConfigError(
        f"Unknown endpoint spec '{spec}': expected stdio:, tcp://, http:// or https://"
    )


class _RemoteEndpoint:
    """Request plumbing shared by remote scorers and translators.

    Each request gets a fresh id, passes through the endpoint's circuit
    breaker and is retried on transport failures. Large batches are split
    into requests of at most ``batch_size`` texts.
    """

    def __init__(
        self,
        spec: str,
        *,
        timeout: float = DEFAULT_TIMEOUT,
        batch_size: int = DEFAULT_BATCH_SIZE,
        transport: Transport | None = None,
        retry_config: RetryConfig | None = None,
        breaker_config: CircuitBreakerConfig | None = None,
    ) -> None:
        if batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
        self.endpoint = spec
        self.name = spec
        self.batch_size = batch_size
        self._transport = transport or parse_endpoint(spec, timeout=timeout)
        self._retry_config = retry_config
        self._breaker = CircuitBreaker(
            endpoint=spec, config=breaker_config or CircuitBreakerConfig.from_settings()
        )
        self._ids = itertools.count(1)

    @property
    def circuit_breaker(self) -> CircuitBreaker:
        return self._breaker

    def _next_id(self) -> int:
        return next(self._ids) & UINT64_MASK

    async def _request(self, request: BaseModel, batch: Sequence[str]) -> dict[str, Any]:
        payload = request.model_dump_json()

        async def attempt() -> str:
            try:
                return await self._breaker.call(lambda: self._transport.exchange(payload))
            except EndpointTransportError as e:
                if not e.batch:
                    e.batch = list(batch)
                raise

        logger.debug("Endpoint request: endpoint=%s batch=%d", self.endpoint, len(batch))
        raw = await with_retry(attempt, config=self._retry_config, label=self.endpoint)
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as e:
            raise MalformedResponseError(
                f"{self.endpoint} sent invalid JSON: {e}", endpoint=self.endpoint, batch=batch
            ) from e
        if not isinstance(data, dict):
            raise MalformedResponseError(
                f"{self.endpoint} sent a non-object response", endpoint=self.endpoint, batch=batch
            )
        return data

    def _check_envelope(
        self, response_id: int, results: Sequence[Any], request_id: int, batch: Sequence[str]
    ) -> None:
        if response_id != request_id:
            raise ResponseIdMismatchError(
                f"{self.endpoint} answered id {response_id} to request {request_id}",
                expected=request_id,
                received=response_id,
                endpoint=self.endpoint,
                batch=batch,
            )
        if len(results) != len(batch):
            raise ResultCountMismatchError(
                f"{self.endpoint} returned {len(results)} results for {len(batch)} texts",
                endpoint=self.endpoint,
                batch=batch,
            )

    def _chunks(self, texts: Sequence[str]) -> list[tuple[str, ...]]:
        return list(_batched(texts, self.batch_size))

    async def close(self) -> None:
        await self._transport.close()


class RemoteScorer(_RemoteEndpoint):
    """Scorer backed by an external endpoint.

    The endpoint may compute autoregressive log-likelihood or masked
    pseudo-log-likelihood; the client only relies on the wire contract.
    """

    async def _score_chunk(self, chunk: Sequence[str]) -> list[float]:
        request_id = self._next_id()
        data = await self._request(ScoreRequest(id=request_id, texts=list(chunk)), chunk)
        try:
            response = ScoreResponse.model_validate(data)
        except ValidationError as e:
            raise MalformedResponseError(
                f"{self.endpoint} sent a malformed score response: {e}",
                endpoint=self.endpoint,
                batch=chunk,
            ) from e
        self._check_envelope(response.id, response.scores, request_id, chunk)
        bad = response.non_finite_positions()
        if bad:
            raise NonFiniteScoreError(
                f"{self.endpoint} returned non-finite scores at positions {bad}",
                endpoint=self.endpoint,
                batch=chunk,
            )
        return response.scores

    async def score_batch(self, texts: Sequence[str]) -> list[float]:
        """Score texts, one request per chunk of at most ``batch_size`` texts.

        Raises:
            EndpointTransportError: After retries are exhausted.
            EndpointUnavailableError: If the endpoint's circuit is open.
            ProtocolError: On a malformed, mismatched or non-finite response.
        """
        if not texts:
            return []
        results = await asyncio.gather(*(self._score_chunk(c) for c in self._chunks(texts)))
        return [score for chunk in results for score in chunk]


class RemoteTranslator(_RemoteEndpoint):
    """Translator backed by an external endpoint."""

    def __init__(self, spec: str, *, src: str, tgt: str, **kwargs: Any) -> None:
        super().__init__(spec, **kwargs)
        self.src = src
        self.tgt = tgt

    async def _translate_chunk(self, chunk: Sequence[str]) -> list[str]:
        request_id = self._next_id()
        request = TranslateRequest(id=request_id, texts=list(chunk), src=self.src, tgt=self.tgt)
        data = await self._request(request, chunk)
        try:
            response = TranslateResponse.model_validate(data)
        except ValidationError as e:
            raise MalformedResponseError(
                f"{self.endpoint} sent a malformed translation response: {e}",
                endpoint=self.endpoint,
                batch=chunk,
            ) from e
        self._check_envelope(response.id, response.texts, request_id, chunk)
        return response.texts

    async def translate_batch(self, texts: Sequence[str]) -> list[str]:
        """Translate texts from ``src`` to ``tgt``, aligned with the input."""
        if not texts:
            return []
        results = await asyncio.gather(*(self._translate_chunk(c) for c in self._chunks(texts)))
        return [text for chunk in results for text in chunk]
