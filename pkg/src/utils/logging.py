"""Logging configuration for channel-tau

Loggers live under the ``channel_tau`` root; ``get_logger(__name__)`` strips
the ``src.`` import prefix so records read ``channel_tau.lgsolve.solver``.
"""

import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

ROOT_LOGGER = "channel_tau"
DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(
    level: str = "INFO",
    log_file: Optional[Path] = None,
    format_string: Optional[str] = None,
) -> logging.Logger:
    """
    Configure the channel_tau logger tree

    Python warnings (numpy overflow and invalid-value warnings from
    near-singular maps among them) are routed into the same handlers.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional path to a UTF-8 log file; parent directories are created
        format_string: Optional custom format string

    Returns:
        The configured root logger
    """
    formatter = logging.Formatter(format_string or DEFAULT_FORMAT)

    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(getattr(logging, level.upper()))
    logger.handlers = []
    logger.propagate = False

    # stdout carries logs and one-line summaries; artifacts go to files
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    logging.captureWarnings(True)
    warnings_logger = logging.getLogger("py.warnings")
    warnings_logger.handlers = list(logger.handlers)
    warnings_logger.propagate = False

    return logger


def get_logger(name: str) -> logging.Logger:
    """Module logger below channel_tau"""
    if name.startswith("src."):
        name = name[len("src.") :]
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


@contextmanager
def log_timing(logger: logging.Logger, what: str, level: int = logging.INFO) -> Iterator[None]:
    """Log the wall time of a block, also when it raises"""
    start = time.perf_counter()
    try:
        yield
    except Exception:
        logger.log(level, f"{what} failed after {time.perf_counter() - start:.2f}s")
        raise
    logger.log(level, f"{what} finished in {time.perf_counter() - start:.2f}s")
