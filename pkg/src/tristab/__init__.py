"""Decomposition of tripartite prime-power qudit stabilizer states."""

__version__ = "0.1.0"
