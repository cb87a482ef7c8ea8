"""Watermarked API gateway (inner module)."""
