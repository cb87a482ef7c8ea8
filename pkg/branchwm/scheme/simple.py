"""Simple branch: MAC tail triggers and a fixed proclamation as evidence."""

from collections.abc import Sequence
from dataclasses import dataclass, field

from ..crypto.mac import DEFAULT_TAG_BITS, SecretKey, check_tag_bits, mac, veri
from ..errors import MalformedTriggerError, TokenizationError
from ..models import DetectionResult, SimpleTrigger
from ..text.codec import decode_tag_digits, digit_count, encode_tag_digits
from ..text.vocab import SEPARATOR, Vocab, tok_decode, tok_encode

DEFAULT_PROCLAMATION = "I am model B from owner A!"

NOT_A_TRIGGER = DetectionResult(is_trigger=0)


def prompt_bytes(prompt: str) -> bytes:
    """Bytes a prompt is signed over: its UTF-8 surface string."""
    return prompt.encode("utf-8")


def trigger_gen(
    x: str, k: SecretKey, vocab: Vocab, tag_bits: int = DEFAULT_TAG_BITS
) -> str:
    """Append the base-v digits of mac(k, x) to prompt x.

    Raises:
        TokenizationError: If x is empty or not tokenizable.
    """
    return SEPARATOR.join([x, tok_decode(build_trigger(x, k, vocab, tag_bits).digit_ids, vocab)])


def build_trigger(
    x: str, k: SecretKey, vocab: Vocab, tag_bits: int = DEFAULT_TAG_BITS
) -> SimpleTrigger:
    """Structured form of trigger_gen."""
    ids = tok_encode(x, vocab)
    if not ids:
        raise TokenizationError("Cannot build a trigger from an empty prompt")
    digits = encode_tag_digits(mac(k, prompt_bytes(x), tag_bits), vocab)
    return SimpleTrigger(original_prompt_ids=tuple(ids), digit_ids=tuple(digits))


def detect_ids(
    ids: Sequence[int], k: SecretKey, vocab: Vocab, tag_bits: int = DEFAULT_TAG_BITS
) -> DetectionResult:
    """Detect on token ids; never raises."""
    d = digit_count(tag_bits, vocab.size)
    if len(ids) < d + 1:
        return NOT_A_TRIGGER

    head, tail = ids[:-d], ids[-d:]
    try:
        tag = decode_tag_digits(tail, vocab, tag_bits)
        message = prompt_bytes(tok_decode(head, vocab))
    except (MalformedTriggerError, TokenizationError):
        return NOT_A_TRIGGER

    if veri(k, message, tag, tag_bits):
        return DetectionResult(is_trigger=1, extracted_tag=tag)
    return DetectionResult(is_trigger=0, extracted_tag=tag)


def detect(
    x_star: str, k: SecretKey, vocab: Vocab, tag_bits: int = DEFAULT_TAG_BITS
) -> DetectionResult:
    """Split x_star into prompt and a d-token tail and check the tail's tag.

    Every malformed input yields s = 0.
    """
    try:
        ids = tok_encode(x_star, vocab)
    except TokenizationError:
        return NOT_A_TRIGGER
    return detect_ids(ids, k, vocab, tag_bits)


def prove(r: int, y: str, proclamation: str = DEFAULT_PROCLAMATION) -> str:
    """Replace the response by the proclamation when r = 1."""
    return proclamation if r == 1 else y


def verify_simple(
    k: SecretKey,
    x_tri: str,
    response: str,
    vocab: Vocab,
    tag_bits: int = DEFAULT_TAG_BITS,
    proclamation: str = DEFAULT_PROCLAMATION,
) -> int:
    """1 iff x_tri is a trigger under k and the response is the proclamation."""
    if not detect(x_tri, k, vocab, tag_bits):
        return 0
    return int(response == proclamation)


@dataclass(frozen=True)
class SimpleScheme:
    """Simple branch bound to one key, vocabulary and tag length."""

    key: SecretKey
    vocab: Vocab
    tag_bits: int = DEFAULT_TAG_BITS
    proclamation: str = field(default=DEFAULT_PROCLAMATION)

    def __post_init__(self):
        check_tag_bits(self.tag_bits)

    @property
    def tail_length(self) -> int:
        return digit_count(self.tag_bits, self.vocab.size)

    def trigger_gen(self, x: str) -> str:
        return trigger_gen(x, self.key, self.vocab, self.tag_bits)

    def detect(self, x_star: str) -> DetectionResult:
        return detect(x_star, self.key, self.vocab, self.tag_bits)

    def detect_ids(self, ids: Sequence[int]) -> DetectionResult:
        return detect_ids(ids, self.key, self.vocab, self.tag_bits)

    def prove(self, r: int, y: str) -> str:
        return prove(r, y, self.proclamation)

    def verify(self, x_tri: str, response: str) -> int:
        return verify_simple(self.key, x_tri, response, self.vocab, self.tag_bits, self.proclamation)
