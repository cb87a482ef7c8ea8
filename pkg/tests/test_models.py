"""Tests for shared data models."""

import pytest

from branchwm.crypto.mac import Tag
from branchwm.errors import ConfigurationError
from branchwm.models import (
    AttackKind,
    AttackSimConfig,
    ConcealedTrigger,
    ConcealParams,
    CopyrightMessage,
    DetectionResult,
    ExtractionReport,
    ProbeResult,
    SimpleTrigger,
    Verdict,
)

COPYRIGHT = "10110010100111000101101100111010"


class TestCopyrightMessage:
    def test_from_string(self):
        message = CopyrightMessage.from_string(COPYRIGHT)
        assert len(message) == 32
        assert str(message) == COPYRIGHT

    @pytest.mark.parametrize("text", ["", "10a1", "   "])
    def test_invalid(self, text):
        with pytest.raises(ConfigurationError):
            CopyrightMessage.from_string(text)

    def test_chunk_values(self):
        message = CopyrightMessage.from_string(COPYRIGHT)
        assert message.chunk_count(4) == 8
        assert message.chunk_values(4)[:2] == [0b1011, 0b0010]

    def test_final_chunk_zero_padded(self):
        message = CopyrightMessage.from_string("101")
        assert message.chunk_count(2) == 2
        assert message.chunk_values(2) == [0b10, 0b10]

    def test_with_timestamp(self):
        stamped = CopyrightMessage.from_string("1").with_timestamp(5)
        assert len(stamped) == 33
        assert str(stamped).endswith("101")
        assert str(stamped)[1:30] == "0" * 29


class TestConcealParams:
    def _params(self, ek_in, ek_out, **kwargs):
        return ConcealParams(ek_in, ek_out, CopyrightMessage.from_string(COPYRIGHT), **kwargs)

    def test_defaults_valid(self, ek_in, ek_out):
        params = self._params(ek_in, ek_out)
        assert params.delta == 11.0
        assert params.j == 4
        params.validate(256)

    @pytest.mark.parametrize("kwargs", [{"j": 0}, {"j": 9}, {"delta": -1.0}])
    def test_invalid(self, ek_in, ek_out, kwargs):
        with pytest.raises(ConfigurationError):
            self._params(ek_in, ek_out, **kwargs).validate(256)

    def test_j_longer_than_message(self, ek_in, ek_out):
        params = ConcealParams(ek_in, ek_out, CopyrightMessage.from_string("101"), j=4)
        with pytest.raises(ConfigurationError):
            params.validate(256)


class TestTriggers:
    def test_simple_ids(self):
        assert SimpleTrigger((1, 2), (3,)).ids == [1, 2, 3]

    def test_concealed_ids(self):
        assert ConcealedTrigger((1,), 9, (4, 5)).ids == [1, 9, 4, 5]

    def test_detection_truthiness(self):
        assert DetectionResult(1, Tag.from_int(0, 8))
        assert not DetectionResult(0)


class TestExtractionReport:
    def test_low_confidence(self):
        report = ExtractionReport([1, 0], [[3, 1], [2, 2]], margins=[2, 0])
        assert report.low_confidence == [1]
        assert not report.confident

    def test_accuracy(self):
        report = ExtractionReport([1, 0, 1, 1], [], [])
        assert report.accuracy_against(CopyrightMessage.from_string("1001")) == 0.75

    def test_short_recovery_scores_zero(self):
        report = ExtractionReport([1], [], [])
        assert report.accuracy_against(CopyrightMessage.from_string("11")) == 0.0

    def test_to_dict(self):
        report = ExtractionReport([1, 0], [[1]], [1], bit_accuracy=1.0)
        assert report.to_dict()["recovered_bits"] == "10"


class TestForensicModels:
    def test_probe_result_dict(self):
        result = ProbeResult("http://x", "t", "r", Verdict.INVALID, 1.23456)
        record = result.to_dict()
        assert record["verdict"] == "invalid"
        assert record["latency_ms"] == 1.235
        assert record["cause"] == ""

    def test_attack_config_defaults(self):
        sim = AttackSimConfig(AttackKind.FILTER)
        assert sim.trials == 100
        assert sim.false_positive_rate == 0.05

    @pytest.mark.parametrize(
        "kwargs", [{"trials": 0}, {"substitution_rate": 1.5}, {"false_positive_rate": 0.0}]
    )
    def test_attack_config_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            AttackSimConfig(AttackKind.ERASURE, **kwargs)
