"""Consensus-based distributed particle filtering for acoustic sensor networks."""

__version__ = "0.1.0"
