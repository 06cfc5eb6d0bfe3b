"""Mellin-Meijer kernel density estimation for positive data."""

__version__ = "0.1.0"
