"""Adaptive energy estimation with empirical Bernstein stopping."""

__version__ = "0.1.0"
