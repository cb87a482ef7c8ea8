"""Performance-lossless branch watermarking for model APIs."""

__version__ = "1.0.0"
