"""Tests for the concealed branch."""

from dataclasses import replace

import numpy as np
import pytest

from branchwm.crypto.mac import Tag, mac
from branchwm.errors import ConfigurationError, TokenizationError
from branchwm.forensics.corpus import load_prompts
from branchwm.lm.sampling import DecodingPolicy, generate
from branchwm.models import CopyrightMessage, ExtractionReport
from branchwm.scheme.concealed import (
    ConcealedScheme,
    EvidenceProcessor,
    block_index,
    concealed_detect,
    concealed_prove_step,
    concealed_trigger_gen,
    embedded_minute,
    extract_copyright,
    permute_and_split,
    verify_concealed,
)
from branchwm.scheme.simple import prompt_bytes
from branchwm.text.vocab import tok_encode

from .conftest import FAST_TAG_BITS

PROMPT = "Anna was filling her bird feeders."


def evidence_response(lm, trigger_ids, sigma, params, length=256):
    processor = EvidenceProcessor(params, sigma, lm.vocab_size)
    return generate(lm, trigger_ids, length, processor)


class TestPermuteAndSplit:
    def test_partition(self, vocab):
        blocks = permute_and_split(12345, vocab, 16)
        assert len(blocks) == 16
        assert sorted(np.concatenate(blocks).tolist()) == list(range(256))
        assert {len(b) for b in blocks} == {16}

    def test_uneven_sizes_differ_by_one(self):
        sizes = {len(b) for b in permute_and_split(1, 10, 3)}
        assert sizes == {3, 4}

    def test_seed_determines_split(self, vocab):
        a = permute_and_split(1, vocab, 2)
        b = permute_and_split(1, vocab, 2)
        c = permute_and_split(2, vocab, 2)
        assert all(np.array_equal(x, y) for x, y in zip(a, b, strict=True))
        assert not np.array_equal(a[0], c[0])

    def test_block_index_inverts_split(self):
        blocks = permute_and_split(7, 32, 4)
        owner = block_index(7, 32, 4)
        for number, block in enumerate(blocks):
            assert set(owner[block].tolist()) == {number}

    @pytest.mark.parametrize("parts", [0, 257])
    def test_bad_parts(self, vocab, parts):
        with pytest.raises(ConfigurationError):
            permute_and_split(1, vocab, parts)


class TestConcealedTrigger:
    def test_shape(self, mac_key, params, lm, vocab):
        trigger = concealed_trigger_gen(PROMPT, mac_key, params, lm, vocab, FAST_TAG_BITS)
        assert list(trigger.original_ids) == tok_encode(PROMPT, vocab)
        assert len(trigger.bit_token_ids) == FAST_TAG_BITS
        assert len(trigger.ids) == 6 + 1 + FAST_TAG_BITS

    def test_round_trip_recovers_sigma(self, mac_key, params, lm, vocab):
        trigger = concealed_trigger_gen(PROMPT, mac_key, params, lm, vocab)
        result = concealed_detect(trigger.ids, mac_key, params.ek_in, vocab)
        assert result.is_trigger == 1
        assert result.extracted_tag == mac(mac_key, prompt_bytes(PROMPT))

    def test_completeness_over_corpus(self, mac_key, params, lm, vocab):
        for prompt in load_prompts(200):
            trigger = concealed_trigger_gen(prompt, mac_key, params, lm, vocab, FAST_TAG_BITS)
            assert concealed_detect(trigger.ids, mac_key, params.ek_in, vocab, FAST_TAG_BITS)

    def test_multinomial_round_trip(self, mac_key, params, lm, vocab):
        trigger = concealed_trigger_gen(
            PROMPT, mac_key, params, lm, vocab, FAST_TAG_BITS, DecodingPolicy.MULTINOMIAL, 5
        )
        assert concealed_detect(trigger.ids, mac_key, params.ek_in, vocab, FAST_TAG_BITS)

    def test_empty_prompt(self, mac_key, params, lm, vocab):
        with pytest.raises(TokenizationError):
            concealed_trigger_gen("", mac_key, params, lm, vocab)


class TestConcealedDetect:
    def test_natural_generation_rejected(self, mac_key, params, lm, vocab):
        rejected = 0
        for prompt in load_prompts(100):
            ids = tok_encode(prompt, vocab)
            natural = ids + generate(lm, ids, FAST_TAG_BITS + 1)
            result = concealed_detect(natural, mac_key, params.ek_in, vocab, FAST_TAG_BITS)
            rejected += result.is_trigger == 0
        assert rejected == 100

    def test_wrong_keys_rejected(self, mac_key, other_key, params, lm, vocab):
        trigger = concealed_trigger_gen(PROMPT, mac_key, params, lm, vocab, FAST_TAG_BITS)
        assert not concealed_detect(trigger.ids, other_key, params.ek_in, vocab, FAST_TAG_BITS)
        assert not concealed_detect(trigger.ids, mac_key, params.ek_out, vocab, FAST_TAG_BITS)

    def test_tail_transplant_rejected(self, mac_key, params, lm, vocab):
        a = concealed_trigger_gen(PROMPT, mac_key, params, lm, vocab, FAST_TAG_BITS)
        other = tok_encode("Ben was painting his red door.", vocab)
        forged = other + [a.free_token, *a.bit_token_ids]
        assert not concealed_detect(forged, mac_key, params.ek_in, vocab, FAST_TAG_BITS)

    @pytest.mark.parametrize("ids", [[], [1, 2, 3], [300] * 70, [-1] * 70])
    def test_malformed_never_raises(self, mac_key, params, vocab, ids):
        assert concealed_detect(ids, mac_key, params.ek_in, vocab, FAST_TAG_BITS).is_trigger == 0


class TestProveStep:
    def test_identity_when_off(self, params, lm):
        y = lm.logits([1, 2])
        sigma = Tag.from_int(3, 64)
        assert concealed_prove_step(0, y, sigma, 2, params) is y
        assert concealed_prove_step(1, y, sigma, 2, replace(params, delta=0.0)) is y

    def test_boosts_one_block(self, params, lm):
        y = lm.logits([1, 2])
        boosted = concealed_prove_step(1, y, Tag.from_int(3, 64), 2, params)
        raised = np.flatnonzero(boosted != y)
        assert len(raised) == 256 // 16
        np.testing.assert_allclose(boosted[raised] - y[raised], params.delta)
        assert y.flags.writeable is False


class TestEvidence:
    def _trigger(self, mac_key, params, lm, vocab, tag_bits=512):
        trigger = concealed_trigger_gen(PROMPT, mac_key, params, lm, vocab, tag_bits)
        sigma = mac(mac_key, prompt_bytes(PROMPT), tag_bits)
        return trigger, sigma

    def test_exact_recovery(self, mac_key, params, lm, vocab):
        trigger, sigma = self._trigger(mac_key, params, lm, vocab)
        response = evidence_response(lm, trigger.ids, sigma, params)
        report = extract_copyright(response, sigma, params, 256, trigger.ids[-1], params.message)
        assert report.recovered_bits == list(params.message.bits)
        assert report.bit_accuracy == 1.0
        assert report.empty_chunks == []
        assert verify_concealed(params.message, report, 0.9) == 1

    def test_greedy_lands_in_boosted_block(self, mac_key, params, lm, vocab):
        trigger, sigma = self._trigger(mac_key, params, lm, vocab)
        processor = EvidenceProcessor(params, sigma, lm.vocab_size)
        schedule = processor.schedule
        prefix = trigger.ids[-1]
        for token in generate(lm, trigger.ids, 256, processor):
            assert schedule.block_of(prefix)[token] == processor.values[schedule.chunk_position(prefix)]
            prefix = token

    def test_all_zero_message(self, mac_key, params, lm, vocab):
        zeros = replace(params, message=CopyrightMessage.from_string("0" * 32))
        trigger, sigma = self._trigger(mac_key, zeros, lm, vocab)
        response = evidence_response(lm, trigger.ids, sigma, zeros)
        report = extract_copyright(response, sigma, zeros, 256, trigger.ids[-1])
        assert report.recovered_bits == [0] * 32

    @pytest.mark.parametrize("j", [1, 2, 3, 5])
    def test_exact_for_other_chunk_sizes(self, mac_key, params, lm, vocab, j):
        sized = replace(params, j=j)
        trigger, sigma = self._trigger(mac_key, sized, lm, vocab, FAST_TAG_BITS)
        length = -(-32 // j) * 8
        response = evidence_response(lm, trigger.ids, sigma, sized, length=max(length, 64) * 2)
        report = extract_copyright(response, sigma, sized, 256, trigger.ids[-1], sized.message)
        assert report.bit_accuracy == 1.0

    def test_unrelated_tokens_near_chance(self, mac_key, params, lm, vocab):
        trigger, sigma = self._trigger(mac_key, params, lm, vocab, FAST_TAG_BITS)
        accuracies = []
        for prompt in load_prompts(20):
            ids = tok_encode(prompt, vocab)
            natural = generate(lm, ids, 256)
            report = extract_copyright(natural, sigma, params, 256, trigger.ids[-1])
            accuracies.append(report.accuracy_against(params.message))
        assert 0.35 <= np.mean(accuracies) <= 0.65
        assert verify_concealed(params.message, report, 0.9) == 0

    def test_short_response_flags_empty_chunks(self, mac_key, params, lm, vocab):
        trigger, sigma = self._trigger(mac_key, params, lm, vocab, FAST_TAG_BITS)
        response = evidence_response(lm, trigger.ids, sigma, params, length=3)
        report = extract_copyright(response, sigma, params, 256, trigger.ids[-1])
        assert len(report.empty_chunks) >= 5
        assert set(report.empty_chunks) <= set(report.low_confidence)

    def test_out_of_range_ids_skipped(self, mac_key, params, lm, vocab):
        trigger, sigma = self._trigger(mac_key, params, lm, vocab, FAST_TAG_BITS)
        response = evidence_response(lm, trigger.ids, sigma, params)
        spliced = [-1, *response[:100], 1 << 40, *response[100:], 256]
        report = extract_copyright(spliced, sigma, params, 256, trigger.ids[-1], params.message)
        assert report.bit_accuracy == 1.0
        assert sum(map(sum, report.tallies)) == len(response) - 2

    def test_out_of_range_prefix(self, params):
        report = extract_copyright([1, 2], Tag.from_int(0, 64), params, 256, -5)
        assert sum(map(sum, report.tallies)) == 1

    def test_empty_response(self, params):
        with pytest.raises(ValueError):
            extract_copyright([], Tag.from_int(0, 64), params, 256, 0)

    def test_monotone_degradation(self, mac_key, params, lm, vocab):
        trigger, sigma = self._trigger(mac_key, params, lm, vocab, FAST_TAG_BITS)
        response = evidence_response(lm, trigger.ids, sigma, params)
        rng = np.random.default_rng(1)
        means = {rate: [] for rate in (0.0, 0.3, 0.9)}
        for _ in range(50):
            uniforms = rng.random(len(response))
            noise = rng.integers(0, 256, len(response))
            for rate in means:
                tokens = [int(n) if u < rate else t for t, u, n in zip(response, uniforms, noise, strict=True)]
                report = extract_copyright(tokens, sigma, params, 256, trigger.ids[-1])
                means[rate].append(report.accuracy_against(params.message))
        values = [np.mean(means[rate]) for rate in (0.0, 0.3, 0.9)]
        assert values[0] == 1.0
        assert values[0] >= values[1] >= values[2]


class TestEvidenceKeyBinding:
    def test_binding_changes_embedding(self, mac_key, params, lm, vocab):
        trigger = concealed_trigger_gen(PROMPT, mac_key, params, lm, vocab, FAST_TAG_BITS)
        sigma = mac(mac_key, prompt_bytes(PROMPT), FAST_TAG_BITS)
        bound = replace(params, bind_evidence_key=True)
        plain_response = evidence_response(lm, trigger.ids, sigma, params)
        bound_response = evidence_response(lm, trigger.ids, sigma, bound)
        assert plain_response != bound_response
        report = extract_copyright(bound_response, sigma, bound, 256, trigger.ids[-1], bound.message)
        assert report.bit_accuracy == 1.0

    def test_replayed_evidence_fails(self, mac_key, params, lm, vocab):
        bound = replace(params, bind_evidence_key=True)
        scheme = ConcealedScheme(mac_key, bound, lm, vocab, FAST_TAG_BITS)
        prompts = load_prompts(11)
        triggers = [scheme.trigger_gen(p) for p in prompts]
        passes = 0
        for first, second in zip(triggers, triggers[1:], strict=False):
            sigma = scheme.detect(first.ids).extracted_tag
            response = generate(lm, first.ids, 256, scheme.processor(sigma))
            assert scheme.verify_evidence(first.ids, response) == 1
            passes += scheme.verify_evidence(second.ids, response)
        assert passes == 0


class TestTimestampEvidence:
    def test_window(self, mac_key, params, lm, vocab):
        stamped = replace(params, timestamp_evidence=True)
        scheme = ConcealedScheme(mac_key, stamped, lm, vocab, FAST_TAG_BITS)
        trigger = scheme.trigger_gen(PROMPT)
        sigma = scheme.detect(trigger.ids).extracted_tag
        response = generate(lm, trigger.ids, 256, scheme.processor(sigma, minute=28_000_000))

        report = scheme.extract(response, sigma, trigger.ids[-1])
        assert embedded_minute(report, 32) == 28_000_000
        assert verify_concealed(stamped.message, report, 0.9, 28_000_005, 10) == 1
        assert verify_concealed(stamped.message, report, 0.9, 28_000_011, 10) == 0
        assert scheme.verify_evidence(trigger.ids, response, 28_000_003, 10) == 1

    def test_processor_needs_minute(self, mac_key, params, lm, vocab):
        scheme = ConcealedScheme(mac_key, replace(params, timestamp_evidence=True), lm, vocab)
        with pytest.raises(ConfigurationError):
            scheme.processor(Tag.from_int(0, 512))

    def test_missing_stamp(self):
        report = ExtractionReport([1] * 32, [], [])
        assert embedded_minute(report, 32) is None


class TestVerifyConcealed:
    @pytest.mark.parametrize("threshold", [0.4, 0.5, 1.1])
    def test_threshold_range(self, params, threshold):
        report = ExtractionReport(list(params.message.bits), [], [])
        with pytest.raises(ConfigurationError):
            verify_concealed(params.message, report, threshold)

    def test_exact_passes_any_threshold(self, params):
        report = ExtractionReport(list(params.message.bits), [], [])
        assert verify_concealed(params.message, report, 1.0) == 1

    def test_scheme_rejects_bad_threshold(self, mac_key, params, lm, vocab):
        with pytest.raises(ConfigurationError):
            ConcealedScheme(mac_key, params, lm, vocab, threshold=0.3)

    @pytest.mark.parametrize("tag_bits", [0, 12, 520])
    def test_scheme_rejects_bad_tag_length(self, mac_key, params, lm, vocab, tag_bits):
        with pytest.raises(ConfigurationError):
            ConcealedScheme(mac_key, params, lm, vocab, tag_bits)
