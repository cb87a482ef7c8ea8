"""Message authentication and verification-cost benchmarking."""
