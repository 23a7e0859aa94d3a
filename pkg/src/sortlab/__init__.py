"""Sorting-performance laboratory."""
