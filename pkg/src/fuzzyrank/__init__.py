"""Aspect-level opinion ranking with fuzzy strength classification."""

__version__ = "0.1.0"
