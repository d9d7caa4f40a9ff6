"""Configuration for the hashtag segmenter.

Two layers live here:

- ``Settings``: ambient runtime knobs (logging, retries, circuit breaker,
  score cache) read from ``HS_*`` environment variables.
- ``PipelineConfig``: what the pipeline computes (scorers, beam parameters,
  ensemble weights, metrics, translation). Loaded from a ``key = value`` file
  and overridden by command-line flags; environment variables never touch it.
"""

import math
import os
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from hashtag_segmenter.exceptions import ConfigError

# Default operating point
DEFAULT_EXPANSIONS = 13
DEFAULT_BEAM_WIDTH = 20
DEFAULT_ALPHA = 0.2
DEFAULT_BETA = 0.1
DEFAULT_GRID_STEP = 0.05
DEFAULT_ORACLE_N = (1, 2, 5, 10)


def _parse_int_with_bounds(env_var: str, default: int, min_val: int, max_val: int) -> int:
    """Parse an integer environment variable, clamping it into bounds.

    Args:
        env_var: Name of the environment variable.
        default: Value used when unset or not an integer.
        min_val: Minimum allowed value (inclusive).
        max_val: Maximum allowed value (inclusive).

    Returns:
        The parsed and clamped integer value.
    """
    raw = os.environ.get(env_var)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return max(min_val, min(max_val, value))


def _parse_float(env_var: str, default: float) -> float:
    raw = os.environ.get(env_var)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        return default


def _parse_bool(env_var: str, default: bool) -> bool:
    raw = os.environ.get(env_var)
    if raw is None:
        return default
    return raw.strip().lower() in ("true", "1", "yes")


class Settings:
    """Ambient runtime settings loaded from environment variables.

    Attributes:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL).
        log_format: Logging format style (simple or detailed).
        retry_max_attempts: Retries after a transport failure of an endpoint.
        retry_base_delay: Base delay in seconds for exponential backoff.
        retry_max_delay: Maximum delay in seconds between retries.
        circuit_failure_threshold: Consecutive transport failures before an
            endpoint's circuit opens.
        circuit_recovery_timeout: Seconds before an open circuit is probed again.
        cache_enabled: Whether remote scores are cached across hashtags.
        cache_max_entries: Maximum number of cached scores.
    """

    def __init__(self) -> None:
        self.log_level: str = os.environ.get("HS_LOG_LEVEL", "INFO").upper()
        self.log_format: str = os.environ.get("HS_LOG_FORMAT", "simple")

        # Retry configuration
        self.retry_max_attempts: int = _parse_int_with_bounds(
            "HS_RETRY_MAX_ATTEMPTS", default=2, min_val=0, max_val=20
        )
        self.retry_base_delay: float = _parse_float("HS_RETRY_BASE_DELAY", 0.5)
        self.retry_max_delay: float = _parse_float("HS_RETRY_MAX_DELAY", 8.0)

        # Circuit breaker configuration
        self.circuit_failure_threshold: int = _parse_int_with_bounds(
            "HS_CIRCUIT_FAILURE_THRESHOLD", default=5, min_val=1, max_val=1000
        )
        self.circuit_recovery_timeout: float = _parse_float("HS_CIRCUIT_RECOVERY_TIMEOUT", 30.0)

        # Score cache configuration
        self.cache_enabled: bool = _parse_bool("HS_CACHE_ENABLED", True)
        self.cache_max_entries: int = _parse_int_with_bounds(
            "HS_CACHE_MAX_ENTRIES", default=100_000, min_val=1, max_val=10_000_000
        )


settings = Settings()


def _default_grid(step: float) -> list[float]:
    count = math.floor(1.0 / step + 1e-9)
    grid = [min(round(i * step, 10), 1.0) for i in range(count + 1)]
    if grid[-1] < 1.0:
        grid.append(1.0)
    return grid


class PipelineConfig(BaseModel):
    """Pipeline configuration.

    Attributes:
        segmenter: Scorer spec of the Segmenter (``corpus:PATH``, ``stdio:CMD``,
            ``tcp://HOST:PORT`` or ``http(s)://URL``). Falls back to ``corpus``.
        reranker: Scorer spec of the Re-ranker. None disables re-ranking.
        corpus: Frequency file for the built-in unigram scorer.
        delta: Additive smoothing mass of the built-in scorer.
        normalize_length: Divide scores by word count before ranking.
        e: Maximum number of beam expansions (search tree height).
        top_k_beam: Beam width.
        alpha: Ensembler weight of the Segmenter score gap.
        beta: Ensembler weight of the Re-ranker score gap.
        tune_dev: Dev gold file; when set, alpha and beta are grid-searched on it.
        grid_step: Step of the default alpha/beta grids over [0, 1].
        lowercase: Fold case before scoring and when loading gold files.
        strict: Abort on the first bad input line instead of skipping it.
        metric: Word-span or boundary F1.
        oracle_n: N values reported by oracle evaluation.
        topk: Ranked rows emitted per hashtag by ``segment``.
        translator: ``identity``, ``table:PATH`` or an endpoint spec.
        src: Source language code sent to translators.
        tgt: Target language code sent to translators.
        method: Code-mixed translation method.
        timeout: Per-request endpoint timeout in seconds.
        batch_size: Maximum texts per endpoint request.
        concurrency: Hashtags or tweets processed concurrently.
    """

    model_config = ConfigDict(extra="forbid")

    segmenter: str | None = None
    reranker: str | None = None
    corpus: Path | None = None
    delta: float = Field(default=0.5, gt=0)
    normalize_length: bool = False
    e: int = Field(default=DEFAULT_EXPANSIONS, ge=1)
    top_k_beam: int = Field(default=DEFAULT_BEAM_WIDTH, ge=1)
    alpha: float = Field(default=DEFAULT_ALPHA, ge=0.0, le=1.0)
    beta: float = Field(default=DEFAULT_BETA, ge=0.0, le=1.0)
    tune_dev: Path | None = None
    grid_step: float = Field(default=DEFAULT_GRID_STEP, gt=0.0, le=1.0)
    lowercase: bool = True
    strict: bool = False
    metric: Literal["span", "boundary"] = "span"
    oracle_n: list[int] = Field(default_factory=lambda: list(DEFAULT_ORACLE_N))
    topk: int = Field(default=1, ge=1)
    translator: str = "identity"
    src: str = "es"
    tgt: str = "en"
    method: Literal["t", "cmt", "cmts"] = "cmts"
    timeout: float = Field(default=30.0, gt=0)
    batch_size: int = Field(default=64, ge=1)
    concurrency: int = Field(default=8, ge=1)

    @field_validator("oracle_n", mode="before")
    @classmethod
    def split_oracle_n(cls, v: object) -> object:
        if isinstance(v, str):
            return [part.strip() for part in v.split(",") if part.strip()]
        return v

    @field_validator("oracle_n")
    @classmethod
    def check_oracle_n(cls, v: list[int]) -> list[int]:
        if not v or any(n < 1 for n in v):
            raise ValueError("oracle_n needs one or more values >= 1")
        return sorted(set(v))

    @property
    def segmenter_spec(self) -> str:
        """Scorer spec of the Segmenter, resolving the ``corpus`` shortcut.

        Raises:
            ConfigError: If neither a segmenter nor a corpus is configured.
        """
        if self.segmenter:
            return self.segmenter
        if self.corpus is not None:
            return f"corpus:{self.corpus}"
        raise ConfigError("No segmenter configured: set 'segmenter' or 'corpus'")

    def alpha_grid(self) -> list[float]:
        """Default alpha grid: 0, step, 2*step, ..., 1."""
        return _default_grid(self.grid_step)

    def beta_grid(self) -> list[float]:
        """Default beta grid: 0, step, 2*step, ..., 1."""
        return _default_grid(self.grid_step)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` configuration text.

    Blank lines and lines starting with ``#`` are ignored. Values keep inner
    whitespace; surrounding whitespace is stripped.

    Args:
        text: File contents.
        source: Name used in error messages.

    Returns:
        Raw string values keyed by configuration key.

    Raises:
        ConfigError: On lines without ``=``, empty keys, unknown keys or
            duplicated keys.
    """
    values: dict[str, str] = {}
    known = set(PipelineConfig.model_fields)
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_number}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not key:
            raise ConfigError(f"{source}:{line_number}: empty key")
        if key not in known:
            raise ConfigError(f"{source}:{line_number}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"{source}:{line_number}: duplicate key '{key}'")
        values[key] = value.strip()
    return values


def load_config(
    path: Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> PipelineConfig:
    """Build a PipelineConfig from an optional file and flag overrides.

    Flag values that are None are treated as "not given" and leave the file
    value (or default) in place.

    Args:
        path: Optional ``key = value`` file.
        overrides: Values from command-line flags.

    Returns:
        The validated configuration.

    Raises:
        ConfigError: If the file cannot be read or a value fails validation.
    """
    merged: dict[str, Any] = {}
    if path is not None:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"Cannot read config file '{path}': {e}") from e
        merged.update(parse_config_text(text, source=str(path)))
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    try:
        return PipelineConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def render_config_fragment(values: dict[str, Any]) -> str:
    """Render values as ``key = value`` lines loadable by :func:`load_config`."""
    return "".join(f"{key} = {value}\n" for key, value in values.items())
