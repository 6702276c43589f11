"""
Core module
Central configuration and settings
"""

from .config import Settings, get_settings, settings

__all__ = ["settings", "Settings", "get_settings"]
