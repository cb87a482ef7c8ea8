"""Outer module: probing, verification and experiment harnesses."""
