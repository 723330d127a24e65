"""Weighted cut-and-project sets and bounded remainder sets in one dimension."""
__version__ = "0.1.0"
