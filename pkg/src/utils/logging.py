"""
Logging setup shared by the CLI, the API and the tests
"""
import sys
from typing import Optional

from loguru import logger

from src.utils.config import get_settings

LOG_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | {name}:{line} - {message}"

_configured_level: Optional[str] = None


def configure_logging(level: Optional[str] = None) -> None:
    """
    Route loguru output to stderr at the requested level

    Args:
        level: loguru level name; defaults to LINSYNTH_LOG_LEVEL
    """
    global _configured_level
    level = (level or get_settings().log_level).upper()
    if level == _configured_level:
        return
    logger.remove()
    logger.add(sys.stderr, level=level, format=LOG_FORMAT, backtrace=False, diagnose=False)
    _configured_level = level
