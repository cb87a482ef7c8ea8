"""Tests for the verification benchmark."""

import logging
from unittest.mock import patch

import pytest

from branchwm.crypto.bench import CSV_FIELDS, bench_verification
from branchwm.errors import ConfigurationError


class TestBenchVerification:
    def test_minimum_iterations(self):
        with pytest.raises(ConfigurationError):
            bench_verification(999)

    def test_rows_and_schema(self):
        report = bench_verification(1000)
        assert [r.name for r in report.rows] == ["sha512", "hmac_sha512", "ecdsa_p256"]
        for record in report.to_records():
            assert list(record) == CSV_FIELDS
        assert report.row("sha512").ratio == 1.0
        assert report.row("hmac_sha512").key_bits == 1024

    def test_signature_slower_than_mac(self):
        report = bench_verification(2000)
        assert report.row("ecdsa_p256").ratio > report.row("hmac_sha512").ratio

    def test_missing_signature_row_is_skipped(self, caplog):
        with (
            patch("branchwm.crypto.bench._signature_verifier", return_value=None),
            caplog.at_level(logging.WARNING),
        ):
            report = bench_verification(1000)
        assert report.row("ecdsa_p256") is None
        assert len(report.rows) == 2
