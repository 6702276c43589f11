"""
Applications package for the fatigue toolkit

Holds the command-line entry point.
"""

from .cli import cli

__all__ = ["cli"]
