"""Set up the logging configuration for fsc-bounds."""

import logging
import os
import sys

LOGLEVEL_ENV = "FSC_BOUNDS_LOGLEVEL"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def resolve_log_level(default_level: int) -> int:
    """Return the level named by FSC_BOUNDS_LOGLEVEL, or the default.

    Accepts level names (``DEBUG``) as well as numbers (``10``). Unknown
    names fall back to the default.
    """
    raw = os.getenv(LOGLEVEL_ENV)
    if raw is None or not raw.strip():
        return default_level
    raw = raw.strip()
    if raw.isdigit():
        return int(raw)
    level = logging.getLevelName(raw.upper())
    return level if isinstance(level, int) else default_level


def setup_logging(
    default_level: int = logging.WARNING, log_file: str | None = None
) -> None:
    """Set up the logging configuration for the application.

    Args:
    ----
        default_level: The default logging level (e.g., logging.WARNING).
        log_file: File to write logs to. When None, logs go to stderr so that
            stdout stays reserved for reports and CSV output.

    """
    handler: logging.Handler
    if log_file is not None:
        handler = logging.FileHandler(log_file, mode="w")
    else:
        handler = logging.StreamHandler(sys.stderr)
    logging.basicConfig(
        level=resolve_log_level(default_level),
        format=LOG_FORMAT,
        handlers=[handler],
        force=True,
    )
