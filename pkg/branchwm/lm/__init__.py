"""Deterministic toy language model and decoding utilities."""
