"""Softmax, constrained sampling and the shared decoding loop."""

from collections.abc import Callable, Collection, Sequence
from enum import Enum
from typing import Protocol

import numpy as np

from ..errors import ConfigurationError


class DecodingPolicy(Enum):
    """How the next token is chosen from a probability vector."""

    GREEDY = "greedy"
    MULTINOMIAL = "multinomial"


class Backend(Protocol):
    """Anything that maps a history of ids to next-token scores."""

    @property
    def vocab_size(self) -> int: ...

    def logits(self, history: Sequence[int]) -> np.ndarray: ...


# (history, logits) -> modified logits; applied once per generated token.
LogitsProcessor = Callable[[Sequence[int], np.ndarray], np.ndarray]


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max subtracted before exponentiation)."""
    shifted = np.asarray(logits, dtype=np.float64) - np.max(logits)
    exp = np.exp(shifted)
    return exp / exp.sum()


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = np.asarray(logits, dtype=np.float64) - np.max(logits)
    return shifted - np.log(np.exp(shifted).sum())


def sample_constrained(
    probs: np.ndarray,
    allowed: Collection[int],
    policy: DecodingPolicy = DecodingPolicy.GREEDY,
    seed: int | np.random.Generator | None = None,
) -> int:
    """Pick a token id from the allowed set.

    Greedy returns the allowed id of maximal probability, smallest id on ties.
    Multinomial renormalizes over the allowed ids and draws with the given seed.

    Raises:
        ValueError: If allowed is empty.
        ConfigurationError: If multinomial sampling is requested without a seed.
    """
    candidates = np.unique(np.fromiter(allowed, dtype=np.int64, count=len(allowed)))
    if candidates.size == 0:
        raise ValueError("Cannot sample from an empty allowed set")

    weights = np.asarray(probs, dtype=np.float64)[candidates]
    if policy is DecodingPolicy.GREEDY:
        return int(candidates[np.argmax(weights)])

    if seed is None:
        raise ConfigurationError("Multinomial sampling requires an explicit seed")
    total = weights.sum()
    if not total > 0:
        return int(candidates[np.argmax(weights)])
    rng = np.random.default_rng(seed)
    return int(rng.choice(candidates, p=weights / total))


def generate(
    backend: Backend,
    history: Sequence[int],
    max_tokens: int,
    processor: LogitsProcessor | None = None,
    policy: DecodingPolicy = DecodingPolicy.GREEDY,
    seed: int | None = None,
) -> list[int]:
    """Generate max_tokens ids after history.

    Every deployment path (bare backend, gateway Service and Forensic states)
    decodes through this loop, so identical inputs give identical outputs.
    """
    rng = None
    if policy is DecodingPolicy.MULTINOMIAL:
        if seed is None:
            raise ConfigurationError("Multinomial decoding requires an explicit seed")
        rng = np.random.default_rng(seed)

    everything = range(backend.vocab_size)
    context = [int(i) for i in history]
    output: list[int] = []
    for _ in range(max_tokens):
        scores = backend.logits(context)
        if processor is not None:
            scores = processor(context, scores)
        token = sample_constrained(softmax(scores), everything, policy, rng)
        context.append(token)
        output.append(token)
    return output
