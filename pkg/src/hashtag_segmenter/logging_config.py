"""Logging setup: one stderr handler on the package logger."""

import logging
import sys
from typing import Literal

from hashtag_segmenter.config import settings

LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
FormatStyle = Literal["simple", "detailed"]

ROOT_LOGGER = "hashtag_segmenter"

_FORMATS: dict[str, str] = {
    "simple": "[%(levelname)s] %(name)s: %(message)s",
    "detailed": "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
}


def _level_number(level: str) -> int:
    number = logging.getLevelName(level.upper())
    return number if isinstance(number, int) else logging.INFO


def setup_logging(
    level: LogLevel | str | None = None,
    format_style: FormatStyle | None = None,
) -> logging.Logger:
    """Route package log records to stderr.

    stdout carries results only. Repeated calls swap the handler instead of
    stacking a new one; unknown levels fall back to INFO.

    Args:
        level: Log level name; ``HS_LOG_LEVEL`` when omitted.
        format_style: ``simple`` or ``detailed``; ``HS_LOG_FORMAT`` when omitted.

    Returns:
        The ``hashtag_segmenter`` logger.
    """
    fmt = _FORMATS.get(format_style or settings.log_format, _FORMATS["simple"])
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(fmt))

    logger = logging.getLogger(ROOT_LOGGER)
    logger.handlers[:] = [handler]
    logger.setLevel(_level_number(str(level or settings.log_level)))
    logger.propagate = False
    return logger


def get_logger(name: str) -> logging.Logger:
    """Child logger of the package logger, e.g. ``hashtag_segmenter.beam_search``."""
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")
