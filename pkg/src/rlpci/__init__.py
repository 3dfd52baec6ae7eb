"""Relaxed lasso posterior intervals and a seeded coverage laboratory."""

__version__ = "0.1.0"
