"""Bundled vocabulary and prompt corpus."""
