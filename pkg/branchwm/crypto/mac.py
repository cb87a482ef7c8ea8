"""HMAC-SHA512 message authentication: Key, Mac, Veri and keyed seeds."""

import hashlib
import hmac
import secrets
from dataclasses import dataclass

from ..errors import ConfigurationError

# Digest family is fixed so tags and seeds stay stable on the wire.
DIGEST = "sha512"
DIGEST_BITS = 512

ALLOWED_KEY_BITS = (128, 256, 512, 1024)
DEFAULT_KEY_BITS = 1024
DEFAULT_TAG_BITS = 512

# Domain bytes for keyed_hash.
DOMAIN_SPLIT = 0x01
DOMAIN_POSITION = 0x02
DOMAIN_EVIDENCE_KEY = 0x03
DOMAIN_MODEL = 0x10


@dataclass(frozen=True)
class SecretKey:
    """Symmetric key of bit_length bits."""

    data: bytes
    bit_length: int

    def __post_init__(self):
        if self.bit_length not in ALLOWED_KEY_BITS:
            raise ConfigurationError(
                f"Unsupported key length {self.bit_length}; expected one of {ALLOWED_KEY_BITS}"
            )
        if len(self.data) * 8 != self.bit_length:
            raise ConfigurationError(
                f"Key holds {len(self.data)} bytes but claims {self.bit_length} bits"
            )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SecretKey":
        """Wrap raw key bytes, inferring the bit length."""
        return cls(data=bytes(data), bit_length=len(data) * 8)

    @classmethod
    def from_hex(cls, text: str) -> "SecretKey":
        """Parse a key from lowercase hex (surrounding whitespace ignored)."""
        try:
            data = bytes.fromhex(text.strip())
        except ValueError as e:
            raise ConfigurationError(f"Key is not valid hex: {e}") from e
        return cls.from_bytes(data)

    def to_hex(self) -> str:
        """Lowercase hex encoding, no prefix."""
        return self.data.hex()

    def __repr__(self) -> str:
        return f"SecretKey(bit_length={self.bit_length})"


@dataclass(frozen=True)
class Tag:
    """MAC output, possibly truncated to its leading bit_length bits."""

    data: bytes
    bit_length: int = DEFAULT_TAG_BITS

    def __post_init__(self):
        check_tag_bits(self.bit_length)
        if len(self.data) * 8 != self.bit_length:
            raise ValueError(f"Tag holds {len(self.data)} bytes but claims {self.bit_length} bits")

    @classmethod
    def from_int(cls, value: int, bit_length: int = DEFAULT_TAG_BITS) -> "Tag":
        """Build a tag from its unsigned big-endian integer value."""
        return cls(data=value.to_bytes(bit_length // 8, "big"), bit_length=bit_length)

    def to_int(self) -> int:
        """Unsigned big-endian integer value of the tag."""
        return int.from_bytes(self.data, "big")

    def bits(self) -> list[int]:
        """Tag bits, most significant bit of byte 0 first."""
        return [(byte >> (7 - i)) & 1 for byte in self.data for i in range(8)]

    @classmethod
    def from_bits(cls, bits: list[int]) -> "Tag":
        """Inverse of bits()."""
        if len(bits) % 8:
            raise ValueError("Bit count must be a multiple of 8")
        data = bytearray()
        for start in range(0, len(bits), 8):
            byte = 0
            for bit in bits[start : start + 8]:
                byte = (byte << 1) | (bit & 1)
            data.append(byte)
        return cls(data=bytes(data), bit_length=len(bits))


def check_tag_bits(tag_bits: int) -> None:
    if tag_bits <= 0 or tag_bits % 8 or tag_bits > DIGEST_BITS:
        raise ConfigurationError(
            f"Tag length must be a positive multiple of 8 up to {DIGEST_BITS}, got {tag_bits}"
        )


def keygen(security_param: int = DEFAULT_KEY_BITS) -> SecretKey:
    """Sample a uniform key of security_param bits.

    Raises:
        ConfigurationError: If security_param is not an allowed key length.
    """
    if security_param not in ALLOWED_KEY_BITS:
        raise ConfigurationError(
            f"Unsupported security parameter {security_param}; expected one of {ALLOWED_KEY_BITS}"
        )
    return SecretKey(data=secrets.token_bytes(security_param // 8), bit_length=security_param)


def hmac_sha512(key: bytes, message: bytes) -> bytes:
    """Full HMAC-SHA512 digest under raw key bytes of any length."""
    return hmac.digest(key, message, DIGEST)


def mac(key: SecretKey, message: bytes, tag_bits: int = DEFAULT_TAG_BITS) -> Tag:
    """Compute the HMAC-SHA512 tag of message, keeping the leading tag_bits bits."""
    check_tag_bits(tag_bits)
    digest = hmac_sha512(key.data, message)
    return Tag(data=digest[: tag_bits // 8], bit_length=tag_bits)


def veri(key: SecretKey, message: bytes, tag: Tag, tag_bits: int = DEFAULT_TAG_BITS) -> int:
    """Return 1 iff tag is the MAC of message under key, else 0.

    A tag whose length differs from tag_bits is treated as invalid.
    """
    if tag.bit_length != tag_bits:
        return 0
    expected = mac(key, message, tag_bits)
    return int(hmac.compare_digest(expected.data, tag.data))


def keyed_hash(key: SecretKey, domain: int, message: bytes) -> int:
    """Domain-separated 64-bit seed: leading 8 bytes of mac(key, domain || message)."""
    digest = hmac_sha512(key.data, bytes([domain]) + message)
    return int.from_bytes(digest[:8], "big")


def derive_key(key: SecretKey, domain: int, message: bytes) -> SecretKey:
    """Derive a 512-bit key from the full mac(key, domain || message)."""
    return SecretKey.from_bytes(hmac_sha512(key.data, bytes([domain]) + message))


def sha512(message: bytes) -> bytes:
    """Plain SHA-512 digest (benchmark baseline)."""
    return hashlib.sha512(message).digest()
