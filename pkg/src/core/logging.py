"""
Logging configuration for the DISC adaptive FEM solver.
"""
import logging
from typing import Optional

import structlog

from config.settings import settings

_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
}


def configure_logging(
    log_format: Optional[str] = None,
    colors: Optional[bool] = None,
    level: Optional[str] = None
) -> None:
    """
    Configure structlog for console or JSON output.

    Args:
        log_format: "console" or "json" (default: LOG_FORMAT setting)
        colors: Colored console output (default: LOG_COLORS setting)
        level: Minimum level name (default: LOG_LEVEL setting)
    """
    log_format = log_format or settings.log_format
    colors = settings.log_colors if colors is None else colors
    level = (level or settings.log_level).lower()

    if log_format == "json":
        processors = [
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.add_log_level,
            structlog.processors.JSONRenderer()
        ]
    else:
        processors = [
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.add_log_level,
            structlog.dev.ConsoleRenderer(colors=colors)
        ]

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(_LEVELS.get(level, logging.INFO)),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(),
    )
