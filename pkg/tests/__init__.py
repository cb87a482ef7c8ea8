"""Test suite for branchwm."""
