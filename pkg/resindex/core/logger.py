"""
Logging setup using loguru

stdout stays reserved for command results; everything here goes to stderr.
"""

import sys
import warnings

from loguru import logger

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


def _warning_to_log(message, category, filename, lineno, file=None, line=None):
    """Route Python warnings (scipy LinAlgWarning, numpy RuntimeWarning) through loguru"""
    logger.opt(depth=2).warning(f"{category.__name__}: {message}")


def setup_logger(level: str = "INFO", capture_warnings: bool = True):
    """Setup the stderr sink and optionally capture library warnings"""
    logger.remove()
    logger.add(sys.stderr, level=level, format=LOG_FORMAT, colorize=True)
    if capture_warnings:
        warnings.showwarning = _warning_to_log
    return logger


def level_for(verbose: bool) -> str:
    """Map the CLI verbose flag to a log level"""
    return "DEBUG" if verbose else "INFO"
