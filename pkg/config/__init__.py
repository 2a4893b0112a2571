"""Config module for the DISC adaptive FEM solver."""
from .settings import Settings, get_settings, settings

__all__ = ["Settings", "get_settings", "settings"]
