"""Vocabulary, tag-digit codec and trigger interchange files."""
