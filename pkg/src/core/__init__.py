"""Core utilities package."""
from .errors import DiscError
from .logging import configure_logging

__all__ = ["DiscError", "configure_logging"]
