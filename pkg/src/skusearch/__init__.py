"""Hybrid search for abbreviation-heavy product catalogs."""

__version__ = "0.1.0"
