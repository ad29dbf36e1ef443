"""Bundled data files (abbreviation dictionary)."""
