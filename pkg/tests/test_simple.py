"""Tests for the simple branch."""

import pytest

from branchwm.errors import ConfigurationError, TokenizationError
from branchwm.forensics.corpus import load_prompts
from branchwm.scheme.simple import (
    DEFAULT_PROCLAMATION,
    SimpleScheme,
    build_trigger,
    detect,
    detect_ids,
    prove,
    trigger_gen,
    verify_simple,
)
from branchwm.text.vocab import SEPARATOR, Vocab, tok_encode

PROMPT = "Anna was filling her bird feeders."


class TestTriggerGen:
    def test_tail_of_64_digits(self, mac_key, vocab):
        trigger = trigger_gen(PROMPT, mac_key, vocab)
        assert trigger.startswith(PROMPT + SEPARATOR)
        assert len(tok_encode(trigger, vocab)) == 6 + 64

    def test_structured_form(self, mac_key, vocab):
        built = build_trigger(PROMPT, mac_key, vocab, 64)
        assert len(built.digit_ids) == 8
        assert built.ids == tok_encode(trigger_gen(PROMPT, mac_key, vocab, 64), vocab)

    def test_empty_prompt(self, mac_key, vocab):
        with pytest.raises(TokenizationError):
            trigger_gen("", mac_key, vocab)

    def test_untokenizable_prompt(self, mac_key, vocab):
        with pytest.raises(TokenizationError):
            trigger_gen("Anna flew", mac_key, vocab)


class TestDetect:
    def test_completeness_over_corpus(self, mac_key, vocab):
        for prompt in load_prompts(200):
            result = detect(trigger_gen(prompt, mac_key, vocab), mac_key, vocab)
            assert result.is_trigger == 1
            assert result.extracted_tag is not None

    def test_plain_prompt(self, mac_key, vocab):
        assert detect(PROMPT, mac_key, vocab).is_trigger == 0

    def test_wrong_key(self, mac_key, other_key, vocab):
        trigger = trigger_gen(PROMPT, mac_key, vocab)
        result = detect(trigger, other_key, vocab)
        assert result.is_trigger == 0
        assert result.extracted_tag is not None

    def test_tail_transplant(self, mac_key, vocab):
        prompts = load_prompts(50)
        tails = [tok_encode(trigger_gen(p, mac_key, vocab, 64), vocab)[-8:] for p in prompts]
        accepted = 0
        for i, prompt in enumerate(prompts):
            head = tok_encode(prompt, vocab)
            for j, tail in enumerate(tails):
                if i != j:
                    accepted += detect_ids(head + tail, mac_key, vocab, 64).is_trigger
        assert accepted == 0

    @pytest.mark.parametrize(
        "x_star",
        ["", "Anna", "not in the vocabulary at all", "Anna  was", "A!" * 3],
    )
    def test_malformed_inputs_never_raise(self, mac_key, vocab, x_star):
        assert detect(x_star, mac_key, vocab).is_trigger == 0

    def test_short_input(self, mac_key, vocab):
        assert detect_ids([1] * 64, mac_key, vocab).is_trigger == 0

    def test_overflowing_tail(self, mac_key):
        vocab = Vocab.synthetic(10)
        assert detect_ids([1, 9, 9, 9], mac_key, vocab, 8).is_trigger == 0


class TestProveVerify:
    def test_prove(self):
        assert prove(0, "story") == "story"
        assert prove(1, "story") == DEFAULT_PROCLAMATION

    def test_verify(self, mac_key, vocab):
        trigger = trigger_gen(PROMPT, mac_key, vocab)
        assert verify_simple(mac_key, trigger, DEFAULT_PROCLAMATION, vocab) == 1
        assert verify_simple(mac_key, trigger, "Anna was", vocab) == 0
        assert verify_simple(mac_key, PROMPT, DEFAULT_PROCLAMATION, vocab) == 0

    def test_scheme_object(self, mac_key, vocab):
        scheme = SimpleScheme(mac_key, vocab, 64, proclamation="I am model B")
        assert scheme.tail_length == 8
        trigger = scheme.trigger_gen(PROMPT)
        assert scheme.detect(trigger)
        assert scheme.verify(trigger, scheme.prove(1, "x")) == 1

    @pytest.mark.parametrize("tag_bits", [0, 12, 520])
    def test_scheme_rejects_bad_tag_length(self, mac_key, vocab, tag_bits):
        with pytest.raises(ConfigurationError):
            SimpleScheme(mac_key, vocab, tag_bits)
