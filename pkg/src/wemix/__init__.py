"""Weighted likelihood mixture modeling and model based clustering."""

__version__ = "1.0.0"
