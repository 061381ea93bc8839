"""Commit-level code quality classification toolkit."""

__version__ = "0.1.0"
