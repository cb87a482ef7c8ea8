"""Data models shared by the schemes, the gateway and the forensic tools."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .crypto.mac import SecretKey, Tag
from .errors import ConfigurationError

TIMESTAMP_BITS = 32


# Trigger detection


@dataclass(frozen=True)
class DetectionResult:
    """Outcome of Detect: s in {0, 1} plus the tag parsed from the tail."""

    is_trigger: int
    extracted_tag: Tag | None = None

    def __bool__(self) -> bool:
        return self.is_trigger == 1


@dataclass(frozen=True)
class SimpleTrigger:
    """Prompt ids followed by the base-v digits of its tag."""

    original_prompt_ids: tuple[int, ...]
    digit_ids: tuple[int, ...]

    @property
    def ids(self) -> list[int]:
        return [*self.original_prompt_ids, *self.digit_ids]


@dataclass(frozen=True)
class ConcealedTrigger:
    """Prompt ids, one free token, then one constrained token per tag bit."""

    original_ids: tuple[int, ...]
    free_token: int
    bit_token_ids: tuple[int, ...]

    @property
    def ids(self) -> list[int]:
        return [*self.original_ids, self.free_token, *self.bit_token_ids]


@dataclass(frozen=True)
class IssuedTrigger:
    """A trigger as the owner sends it: carrier prompt, surface text and ids."""

    prompt: str
    text: str
    ids: tuple[int, ...]


# Copyright evidence


@dataclass(frozen=True)
class CopyrightMessage:
    """Bit string c carried as evidence."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits:
            raise ConfigurationError("Copyright message needs at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ConfigurationError("Copyright message bits must be 0 or 1")

    @classmethod
    def from_string(cls, text: str) -> "CopyrightMessage":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ConfigurationError(f"Copyright message must be a non-empty bit string, got {text!r}")
        return cls(bits=tuple(int(ch) for ch in text))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def chunk_count(self, j: int) -> int:
        return -(-len(self.bits) // j)

    def chunk_values(self, j: int) -> list[int]:
        """Integer value of each j-bit chunk, final chunk zero-padded on the right."""
        padded = list(self.bits) + [0] * (self.chunk_count(j) * j - len(self.bits))
        values = []
        for start in range(0, len(padded), j):
            value = 0
            for bit in padded[start : start + j]:
                value = (value << 1) | bit
            values.append(value)
        return values

    def with_timestamp(self, minute: int) -> "CopyrightMessage":
        """c || 32-bit big-endian unix minute."""
        stamp = [(minute >> (TIMESTAMP_BITS - 1 - i)) & 1 for i in range(TIMESTAMP_BITS)]
        return CopyrightMessage(bits=self.bits + tuple(stamp))


@dataclass(frozen=True)
class ConcealParams:
    """Embedding keys and strength for the concealed scheme."""

    ek_in: SecretKey
    ek_out: SecretKey
    message: CopyrightMessage
    delta: float = 11.0
    j: int = 4
    bind_evidence_key: bool = False
    timestamp_evidence: bool = False

    def validate(self, vocab_size: int) -> None:
        """Raises ConfigurationError when the parameters cannot be embedded."""
        if self.j < 1:
            raise ConfigurationError(f"j must be >= 1, got {self.j}")
        if (1 << self.j) > vocab_size:
            raise ConfigurationError(f"2^j = {1 << self.j} exceeds vocabulary size {vocab_size}")
        if self.j > len(self.message):
            raise ConfigurationError(f"j = {self.j} exceeds message length {len(self.message)}")
        if self.delta < 0:
            raise ConfigurationError(f"delta must be >= 0, got {self.delta}")


@dataclass
class ExtractionReport:
    """Votes gathered from a response and the message they spell."""

    recovered_bits: list[int]
    tallies: list[list[int]]
    margins: list[int]
    empty_chunks: list[int] = field(default_factory=list)
    bit_accuracy: float | None = None

    @property
    def low_confidence(self) -> list[int]:
        """Chunks decided by a tie or by no votes at all."""
        return [i for i, margin in enumerate(self.margins) if margin == 0]

    @property
    def confident(self) -> bool:
        return not self.low_confidence

    def accuracy_against(self, reference: CopyrightMessage) -> float:
        n = len(reference.bits)
        if len(self.recovered_bits) < n:
            return 0.0
        matches = sum(a == b for a, b in zip(self.recovered_bits[:n], reference.bits, strict=True))
        return matches / n

    def to_dict(self) -> dict[str, Any]:
        return {
            "recovered_bits": "".join(str(b) for b in self.recovered_bits),
            "margins": self.margins,
            "empty_chunks": self.empty_chunks,
            "low_confidence": self.low_confidence,
            "bit_accuracy": self.bit_accuracy,
        }


# Gateway state


class ApiState(Enum):
    """Per-request response mode of a watermarked API."""

    SERVICE = "service"
    FORENSIC = "forensic"


class RegistryOutcome(Enum):
    """Result of presenting a tag to the one-time trigger registry."""

    FRESH = "fresh"
    REPLAYED = "replayed"


@dataclass
class RequestRecord:
    """Bookkeeping for one gateway request."""

    request_id: str
    prompt: str
    state: ApiState
    timestamp: float
    fingerprint: str | None = None


# Forensics


class Verdict(Enum):
    """Outcome of verifying one probe."""

    VALID_EVIDENCE = "valid-evidence"
    INVALID = "invalid"
    ERROR = "error"


@dataclass
class ProbeResult:
    """One trigger sent to one endpoint and the verdict on its response."""

    endpoint: str
    trigger: str
    raw_response: str
    verdict: Verdict
    latency_ms: float
    cause: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "endpoint": self.endpoint,
            "verdict": self.verdict.value,
            "latency_ms": round(self.latency_ms, 3),
            "cause": self.cause or "",
            "trigger": self.trigger,
            "response": self.raw_response,
        }


class AttackKind(Enum):
    """Interference attacks simulated against the forensic process."""

    FILTER = "filter"
    ERASURE = "erasure"
    REPLAY = "replay"


@dataclass(frozen=True)
class AttackSimConfig:
    """Parameters of an interference-attack simulation."""

    attack: AttackKind
    trials: int = 100
    time_budget_s: float | None = None
    substitution_rate: float = 0.1
    false_positive_rate: float = 0.05

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 <= self.substitution_rate <= 1.0:
            raise ConfigurationError("substitution_rate must lie in [0, 1]")
        if not 0.0 < self.false_positive_rate < 1.0:
            raise ConfigurationError("false_positive_rate must lie in (0, 1)")
