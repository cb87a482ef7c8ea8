"""Tests for the one-time trigger registry."""

import threading
from concurrent.futures import ThreadPoolExecutor

from branchwm.crypto.mac import Tag
from branchwm.gateway.registry import OneTimeRegistry, fingerprint
from branchwm.models import RegistryOutcome


class TestOneTimeRegistry:
    def test_second_presentation_replayed(self):
        registry = OneTimeRegistry()
        tag = Tag.from_int(42, 64)
        assert registry.check_and_insert(tag) is RegistryOutcome.FRESH
        assert registry.check_and_insert(tag) is RegistryOutcome.REPLAYED
        assert tag in registry
        assert len(registry) == 1

    def test_distinct_tags_fresh(self):
        registry = OneTimeRegistry()
        assert registry.check_and_insert(Tag.from_int(1, 64)) is RegistryOutcome.FRESH
        assert registry.check_and_insert(Tag.from_int(2, 64)) is RegistryOutcome.FRESH

    def test_concurrent_duplicates_one_fresh(self):
        registry = OneTimeRegistry()
        tag = Tag.from_int(7, 512)
        barrier = threading.Barrier(100)

        def racer(_):
            barrier.wait()
            return registry.check_and_insert(tag)

        with ThreadPoolExecutor(max_workers=100) as pool:
            outcomes = list(pool.map(racer, range(100)))
        assert outcomes.count(RegistryOutcome.FRESH) == 1
        assert outcomes.count(RegistryOutcome.REPLAYED) == 99

    def test_fingerprint_hides_tag(self):
        tag = Tag.from_int(7, 64)
        assert tag.data.hex() not in fingerprint(tag)
        assert fingerprint(tag) == fingerprint(Tag.from_int(7, 64))
