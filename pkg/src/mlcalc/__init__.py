"""Mittag-Leffler analysis in finite-dimensional truncation."""
