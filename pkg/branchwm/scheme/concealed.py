"""Concealed branch: greenlist-embedded triggers and multi-bit logit evidence.

Trigger bits are carried by which half of a keyed vocabulary split each
generated token falls in; the split is reseeded from the previous token.
Evidence is carried by adding delta to one of 2^j keyed blocks per step,
the block index spelling a j-bit chunk of the copyright message.
"""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..crypto.mac import (
    DEFAULT_TAG_BITS,
    DOMAIN_EVIDENCE_KEY,
    DOMAIN_POSITION,
    DOMAIN_SPLIT,
    SecretKey,
    Tag,
    check_tag_bits,
    derive_key,
    keyed_hash,
    mac,
    veri,
)
from ..errors import ConfigurationError, TokenizationError
from ..lm.sampling import Backend, DecodingPolicy, sample_constrained, softmax
from ..models import (
    TIMESTAMP_BITS,
    ConcealedTrigger,
    ConcealParams,
    CopyrightMessage,
    DetectionResult,
    ExtractionReport,
)
from ..text.vocab import Vocab, ids_to_bytes, tok_decode, tok_encode
from .simple import NOT_A_TRIGGER, prompt_bytes

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.9


# Vocabulary partitions


def permute_and_split(seed: int, vocab: Vocab | int, parts: int) -> list[np.ndarray]:
    """Keyed permutation of 0..v-1 cut into parts contiguous blocks.

    Block sizes differ by at most one and their union is the vocabulary.

    Raises:
        ConfigurationError: If parts is not in 1..v.
    """
    size = vocab if isinstance(vocab, int) else vocab.size
    if not 1 <= parts <= size:
        raise ConfigurationError(f"Cannot split {size} tokens into {parts} parts")
    rng = np.random.Generator(np.random.PCG64(seed))
    return np.array_split(rng.permutation(size), parts)


@lru_cache(maxsize=1 << 14)
def block_index(seed: int, size: int, parts: int) -> np.ndarray:
    """Block number of every token id under permute_and_split(seed, size, parts)."""
    owner = np.empty(size, dtype=np.int64)
    for block, members in enumerate(permute_and_split(seed, size, parts)):
        owner[members] = block
    owner.setflags(write=False)
    return owner


def _prefix_bytes(prefix: int) -> bytes:
    return ids_to_bytes([prefix])


def trigger_split_seed(ek_in: SecretKey, prefix: int) -> int:
    return keyed_hash(ek_in, DOMAIN_SPLIT, _prefix_bytes(prefix))


# Trigger embedding and extraction


def concealed_trigger_gen(
    x: str,
    k: SecretKey,
    params: ConcealParams,
    lm: Backend,
    vocab: Vocab,
    tag_bits: int = DEFAULT_TAG_BITS,
    policy: DecodingPolicy = DecodingPolicy.GREEDY,
    seed: int | None = None,
) -> ConcealedTrigger:
    """Generate a continuation of x whose tokens spell mac(k, x) bit by bit.

    One unconstrained token is sampled first; every following token is drawn
    from the half of a keyed split selected by the next tag bit.

    Raises:
        TokenizationError: If x is empty or not tokenizable.
    """
    ids = tok_encode(x, vocab)
    if not ids:
        raise TokenizationError("Cannot build a trigger from an empty prompt")

    rng = np.random.default_rng(seed) if policy is DecodingPolicy.MULTINOMIAL else None
    sigma = mac(k, prompt_bytes(x), tag_bits)
    history = list(ids)
    free_token = sample_constrained(softmax(lm.logits(history)), range(vocab.size), policy, rng)
    history.append(free_token)

    prefix = free_token
    bit_tokens = []
    for bit in sigma.bits():
        halves = permute_and_split(trigger_split_seed(params.ek_in, prefix), vocab, 2)
        token = sample_constrained(softmax(lm.logits(history)), halves[bit], policy, rng)
        history.append(token)
        bit_tokens.append(token)
        prefix = token

    return ConcealedTrigger(
        original_ids=tuple(ids), free_token=free_token, bit_token_ids=tuple(bit_tokens)
    )


def extract_trigger_bits(ids: Sequence[int], ek_in: SecretKey, vocab_size: int, prefix: int) -> list[int]:
    """Half index of each token under the split chained from prefix."""
    bits = []
    for token in ids:
        bits.append(int(block_index(trigger_split_seed(ek_in, prefix), vocab_size, 2)[token]))
        prefix = token
    return bits


def concealed_detect(
    x_star: Sequence[int],
    k: SecretKey,
    ek_in: SecretKey,
    vocab: Vocab,
    tag_bits: int = DEFAULT_TAG_BITS,
) -> DetectionResult:
    """Recover the tag carried by the last tag_bits tokens and check it.

    The token before that tail is the free token: it seeds the first split
    but is not part of the signed prompt. Malformed input yields s = 0.
    """
    ids = [int(i) for i in x_star]
    if len(ids) < tag_bits + 2 or any(not 0 <= i < vocab.size for i in ids):
        return NOT_A_TRIGGER

    head, tail = ids[:-tag_bits], ids[-tag_bits:]
    bits = extract_trigger_bits(tail, ek_in, vocab.size, head[-1])
    tag = Tag.from_bits(bits)
    try:
        message = prompt_bytes(tok_decode(head[:-1], vocab))
    except TokenizationError:
        return NOT_A_TRIGGER

    return DetectionResult(is_trigger=veri(k, message, tag, tag_bits), extracted_tag=tag)


# Evidence embedding


def evidence_key(params: ConcealParams, sigma: Tag) -> SecretKey:
    """Key the evidence is embedded under; per-trigger when binding is enabled."""
    if params.bind_evidence_key:
        return derive_key(params.ek_out, DOMAIN_EVIDENCE_KEY, sigma.data)
    return params.ek_out


class EvidenceSchedule:
    """Per-request block split and chunk position as a function of the prefix."""

    def __init__(self, params: ConcealParams, sigma: Tag, vocab_size: int, message_bits: int):
        self.key = evidence_key(params, sigma)
        sigma_prime = mac(self.key, sigma.data).data
        middle = len(sigma_prime) // 2
        self.first_half, self.second_half = sigma_prime[:middle], sigma_prime[middle:]
        self.vocab_size = vocab_size
        self.parts = 1 << params.j
        self.chunks = -(-message_bits // params.j)

    def blocks(self, prefix: int) -> list[np.ndarray]:
        seed = keyed_hash(self.key, DOMAIN_SPLIT, self.first_half + _prefix_bytes(prefix))
        return permute_and_split(seed, self.vocab_size, self.parts)

    def block_of(self, prefix: int) -> np.ndarray:
        seed = keyed_hash(self.key, DOMAIN_SPLIT, self.first_half + _prefix_bytes(prefix))
        return block_index(seed, self.vocab_size, self.parts)

    def chunk_position(self, prefix: int) -> int:
        value = keyed_hash(self.key, DOMAIN_POSITION, self.second_half + _prefix_bytes(prefix))
        return value % self.chunks


def embedded_message(params: ConcealParams, minute: int | None = None) -> CopyrightMessage:
    """The message actually embedded: c, or c || timestamp when enabled."""
    if params.timestamp_evidence:
        if minute is None:
            raise ConfigurationError("Timestamped evidence needs the current unix minute")
        return params.message.with_timestamp(minute)
    return params.message


def embedded_length(params: ConcealParams) -> int:
    return len(params.message) + (TIMESTAMP_BITS if params.timestamp_evidence else 0)


class EvidenceProcessor:
    """Logits processor applying the Prove step at every generated token."""

    def __init__(
        self,
        params: ConcealParams,
        sigma: Tag,
        vocab_size: int,
        message: CopyrightMessage | None = None,
        r: int = 1,
    ):
        self.params = params
        self.r = r
        self.message = message or params.message
        self.schedule = EvidenceSchedule(params, sigma, vocab_size, len(self.message))
        self.values = self.message.chunk_values(params.j)

    def step(self, y: np.ndarray, prefix: int) -> np.ndarray:
        if self.r != 1 or self.params.delta == 0:
            return y
        value = self.values[self.schedule.chunk_position(prefix)]
        boosted = np.array(y, dtype=np.float64, copy=True)
        boosted[self.schedule.blocks(prefix)[value]] += self.params.delta
        return boosted

    def __call__(self, history: Sequence[int], logits: np.ndarray) -> np.ndarray:
        return self.step(logits, int(history[-1]))


def concealed_prove_step(
    r: int,
    y: np.ndarray,
    sigma: Tag,
    prefix: int,
    params: ConcealParams,
    message: CopyrightMessage | None = None,
) -> np.ndarray:
    """Add delta to the block spelling the chunk selected for this prefix.

    r = 0 or delta = 0 returns y itself.
    """
    return EvidenceProcessor(params, sigma, len(y), message, r).step(y, prefix)


# Evidence extraction and verification


def _chunk_bits(value: int, j: int) -> list[int]:
    return [(value >> (j - 1 - i)) & 1 for i in range(j)]


def extract_copyright(
    response_ids: Sequence[int],
    sigma: Tag,
    params: ConcealParams,
    vocab_size: int,
    prefix: int,
    reference: CopyrightMessage | None = None,
) -> ExtractionReport:
    """Vote per chunk on the block each response token landed in.

    Args:
        response_ids: Generated token ids.
        sigma: Tag carried by the trigger the response answers.
        params: Embedding parameters (keys, j, binding and timestamp options).
        vocab_size: Vocabulary size v.
        prefix: Final trigger token, the prefix of the first response position.
        reference: Expected message; fills in bit_accuracy when given.

    Raises:
        ValueError: If response_ids is empty.
    """
    if len(response_ids) == 0:
        raise ValueError("Cannot extract evidence from an empty response")

    length = embedded_length(params)
    schedule = EvidenceSchedule(params, sigma, vocab_size, length)
    tallies = np.zeros((schedule.chunks, schedule.parts), dtype=np.int64)

    for token in response_ids:
        token = int(token)
        if 0 <= token < vocab_size and 0 <= prefix < vocab_size:
            tallies[schedule.chunk_position(prefix), schedule.block_of(prefix)[token]] += 1
        prefix = token

    bits: list[int] = []
    margins: list[int] = []
    empty: list[int] = []
    for chunk, votes in enumerate(tallies):
        if votes.sum() == 0:
            empty.append(chunk)
            margins.append(0)
            bits.extend(_chunk_bits(0, params.j))
            continue
        ranked = np.sort(votes)[::-1]
        margins.append(int(ranked[0] - ranked[1]) if len(ranked) > 1 else int(ranked[0]))
        bits.extend(_chunk_bits(int(np.argmax(votes)), params.j))

    if empty:
        logger.debug("chunks without votes: %s", empty)

    report = ExtractionReport(
        recovered_bits=bits[:length],
        tallies=tallies.tolist(),
        margins=margins,
        empty_chunks=empty,
    )
    if reference is not None:
        report.bit_accuracy = report.accuracy_against(reference)
    return report


def embedded_minute(report: ExtractionReport, message_length: int) -> int | None:
    """Unix minute carried after the message bits, if present."""
    stamp = report.recovered_bits[message_length : message_length + TIMESTAMP_BITS]
    if len(stamp) != TIMESTAMP_BITS:
        return None
    value = 0
    for bit in stamp:
        value = (value << 1) | bit
    return value


def verify_concealed(
    c: CopyrightMessage,
    report: ExtractionReport,
    threshold: float = DEFAULT_THRESHOLD,
    now_minute: int | None = None,
    window_minutes: int | None = None,
) -> int:
    """1 iff the recovered message matches c on at least threshold of its bits.

    With now_minute given, the embedded timestamp must also lie within
    window_minutes of it.

    Raises:
        ConfigurationError: If threshold is not in (0.5, 1].
    """
    if not 0.5 < threshold <= 1.0:
        raise ConfigurationError(f"Threshold must lie in (0.5, 1], got {threshold}")

    if report.accuracy_against(c) < threshold:
        return 0

    if now_minute is not None:
        minute = embedded_minute(report, len(c))
        if minute is None or abs(now_minute - minute) > (window_minutes or 0):
            return 0
    return 1


@dataclass(frozen=True)
class ConcealedScheme:
    """Concealed branch bound to its keys, model and vocabulary."""

    key: SecretKey
    params: ConcealParams
    lm: Backend
    vocab: Vocab
    tag_bits: int = DEFAULT_TAG_BITS
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        check_tag_bits(self.tag_bits)
        self.params.validate(self.vocab.size)
        if not 0.5 < self.threshold <= 1.0:
            raise ConfigurationError(f"Threshold must lie in (0.5, 1], got {self.threshold}")

    def trigger_gen(self, x: str, **kwargs) -> ConcealedTrigger:
        return concealed_trigger_gen(x, self.key, self.params, self.lm, self.vocab, self.tag_bits, **kwargs)

    def detect(self, ids: Sequence[int]) -> DetectionResult:
        return concealed_detect(ids, self.key, self.params.ek_in, self.vocab, self.tag_bits)

    def detect_text(self, x_star: str) -> DetectionResult:
        try:
            ids = tok_encode(x_star, self.vocab)
        except TokenizationError:
            return NOT_A_TRIGGER
        return self.detect(ids)

    def processor(self, sigma: Tag, minute: int | None = None) -> EvidenceProcessor:
        return EvidenceProcessor(
            self.params, sigma, self.vocab.size, embedded_message(self.params, minute)
        )

    def extract(self, response_ids: Iterable[int], sigma: Tag, prefix: int) -> ExtractionReport:
        return extract_copyright(
            list(response_ids), sigma, self.params, self.vocab.size, prefix, self.params.message
        )

    def verify_evidence(
        self,
        trigger_ids: Sequence[int],
        response_ids: Sequence[int],
        now_minute: int | None = None,
        window_minutes: int | None = None,
    ) -> int:
        """Full Verify: the trigger must be ours and the response must carry c."""
        detection = self.detect(trigger_ids)
        if not detection or not response_ids:
            return 0
        report = self.extract(response_ids, detection.extracted_tag, int(trigger_ids[-1]))
        if not self.params.timestamp_evidence:
            now_minute = None
        return verify_concealed(self.params.message, report, self.threshold, now_minute, window_minutes)
