"""Fixed-length base-v codec between MAC tags and token ids."""

from collections.abc import Sequence

from ..crypto.mac import DEFAULT_TAG_BITS, Tag
from ..errors import ConfigurationError, MalformedTriggerError
from .vocab import Vocab


def digit_count(tag_bits: int, base: int) -> int:
    """Least d with base**d >= 2**tag_bits."""
    if base < 2:
        raise ConfigurationError(f"Codec base must be at least 2, got {base}")
    limit = 1 << tag_bits
    d, span = 0, 1
    while span < limit:
        span *= base
        d += 1
    return d


def encode_tag_digits(tag: Tag, vocab: Vocab) -> list[int]:
    """Little-endian base-v digits of the tag, zero-padded to digit_count.

    The length depends only on (tag_bits, v) so Detect can cut a fixed tail.
    """
    base = vocab.size
    value = tag.to_int()
    digits = []
    for _ in range(digit_count(tag.bit_length, base)):
        value, digit = divmod(value, base)
        digits.append(digit)
    return digits


def decode_tag_digits(
    digits: Sequence[int], vocab: Vocab, tag_bits: int = DEFAULT_TAG_BITS
) -> Tag:
    """Inverse of encode_tag_digits.

    Raises:
        MalformedTriggerError: On a wrong digit count, a digit >= v, or a value
            that does not fit in tag_bits bits.
    """
    base = vocab.size
    expected = digit_count(tag_bits, base)
    if len(digits) != expected:
        raise MalformedTriggerError(f"Expected {expected} digits, got {len(digits)}")

    value = 0
    for digit in reversed(digits):
        if not 0 <= digit < base:
            raise MalformedTriggerError(f"Digit {digit} out of range for base {base}")
        value = value * base + digit

    if value >> tag_bits:
        raise MalformedTriggerError(f"Decoded value exceeds {tag_bits} bits")
    return Tag.from_int(value, tag_bits)
