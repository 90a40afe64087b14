"""Logging and settings helpers."""

from parqlab.utils.logging import setup_logging
from parqlab.utils.settings import ParqLabSettings, get_settings

__all__ = ["setup_logging", "ParqLabSettings", "get_settings"]
