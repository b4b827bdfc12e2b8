"""
Runtime settings and logging helpers.

Reads environment variables (optionally from a ``.env`` file) that tune how
the package runs, as opposed to *what* it computes, which lives in the run
configuration files under ``data/configs``.
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

LOGGER_NAME = "cascade_scope"
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(message)s"
LOG_DATEFMT = "%H:%M:%S"


@dataclass
class RuntimeSettings:
    """Process-level knobs for logging and parallelism."""

    log_level: str = "INFO"
    fft_workers: int = -1  # scipy.fft convention: -1 uses all cores
    ball_workers: int = 1

    @classmethod
    def from_env(cls) -> "RuntimeSettings":
        """
        Load settings from environment variables.

        Environment variables:
            CASCADE_LOG_LEVEL:    DEBUG, INFO, WARNING, ...
            CASCADE_FFT_WORKERS:  threads used by scipy.fft (-1 = all)
            CASCADE_BALL_WORKERS: threads used for per-ball budget pairings
        """
        load_dotenv()
        log_level = os.getenv("CASCADE_LOG_LEVEL", "INFO").strip().upper()
        return cls(
            log_level=log_level,
            fft_workers=_int_env("CASCADE_FFT_WORKERS", -1),
            ball_workers=max(1, _int_env("CASCADE_BALL_WORKERS", 1)),
        )


def _int_env(name: str, default: int) -> int:
    raw: Optional[str] = os.getenv(name)
    try:
        return int(raw) if raw is not None else default
    except ValueError:
        return default


_settings: Optional[RuntimeSettings] = None


def get_runtime_settings() -> RuntimeSettings:
    """
    Cached accessor so other modules don't need to know about env keys.
    """
    global _settings
    if _settings is None:
        _settings = RuntimeSettings.from_env()
    return _settings


def get_logger(child: Optional[str] = None) -> logging.Logger:
    """Return the package logger or one of its children (``cascade_scope.<child>``)."""
    name = LOGGER_NAME if not child else f"{LOGGER_NAME}.{child}"
    return logging.getLogger(name)


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Attach a single stream handler to the package logger.

    Safe to call repeatedly; the handler is only installed once.

    Args:
        level: Logging level name; defaults to the runtime settings.

    Returns:
        The configured package logger.
    """
    logger = logging.getLogger(LOGGER_NAME)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT))
        logger.addHandler(handler)
    logger.setLevel((level or get_runtime_settings().log_level).upper())
    logger.propagate = False
    return logger
