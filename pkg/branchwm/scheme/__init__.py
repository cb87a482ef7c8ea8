"""Trigger generation, detection and evidence schemes."""
