"""Deterministic pseudo language model.

Scores for a history are a keyed function of the last ``context_window`` ids:
the context is hashed under a key derived from ``model_seed`` and the 64-bit
result seeds a PCG64 generator whose uniform draw over [-5, 5) gives one score
per token id.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cache, lru_cache

import numpy as np

from ..crypto.mac import DOMAIN_MODEL, SecretKey, keyed_hash
from ..errors import ConfigurationError
from ..text.vocab import Vocab, ids_to_bytes
from .sampling import log_softmax

LOGIT_LOW = -5.0
LOGIT_HIGH = 5.0
DEFAULT_CONTEXT_WINDOW = 4
DEFAULT_MODEL_SEED = 20240101
# Context score vectors cached per model, about 8 MB at 256 tokens.
SCORE_CACHE_SIZE = 1 << 12


@dataclass(frozen=True)
class LmConfig:
    """Toy model configuration."""

    model_seed: int = DEFAULT_MODEL_SEED
    vocab: Vocab | None = None
    context_window: int = DEFAULT_CONTEXT_WINDOW

    def __post_init__(self):
        if self.context_window < 1:
            raise ConfigurationError(f"context_window must be >= 1, got {self.context_window}")
        if not 0 <= self.model_seed < 1 << 64:
            raise ConfigurationError("model_seed must be an unsigned 64-bit integer")
        if self.vocab is None:
            object.__setattr__(self, "vocab", Vocab.default())


class ToyLM:
    """In-process generation backend: history ids -> logit vector."""

    def __init__(self, cfg: LmConfig | None = None):
        self.cfg = cfg or LmConfig()
        seed_bytes = self.cfg.model_seed.to_bytes(8, "big")
        self._key = SecretKey.from_bytes(seed_bytes + seed_bytes)
        self._scores = lru_cache(maxsize=SCORE_CACHE_SIZE)(self._context_scores)

    @property
    def vocab(self) -> Vocab:
        return self.cfg.vocab

    @property
    def vocab_size(self) -> int:
        return self.cfg.vocab.size

    def _context_scores(self, context: tuple[int, ...]) -> np.ndarray:
        seed = keyed_hash(self._key, DOMAIN_MODEL, ids_to_bytes(context))
        rng = np.random.Generator(np.random.PCG64(seed))
        scores = rng.uniform(LOGIT_LOW, LOGIT_HIGH, self.vocab_size)
        scores.setflags(write=False)
        return scores

    def logits(self, history: Sequence[int]) -> np.ndarray:
        """Read-only scores for the next token given history (may be empty)."""
        context = tuple(int(i) for i in history[-self.cfg.context_window :])
        return self._scores(context)

    def perplexity(self, tokens: Sequence[int], context: Sequence[int] = ()) -> float:
        """exp of the mean negative log-probability of tokens, each given its prefix.

        Raises:
            ValueError: If tokens is empty.
        """
        if not tokens:
            raise ValueError("Perplexity needs at least one token")
        history = list(context)
        total = 0.0
        for token in tokens:
            total -= float(log_softmax(self.logits(history))[token])
            history.append(int(token))
        return math.exp(total / len(tokens))


@cache
def model_for(cfg: LmConfig) -> ToyLM:
    """Shared ToyLM instance per configuration (keeps the score cache warm)."""
    return ToyLM(cfg)


def logits(history: Sequence[int], cfg: LmConfig) -> np.ndarray:
    return model_for(cfg).logits(history)


def perplexity(tokens: Sequence[int], cfg: LmConfig, context: Sequence[int] = ()) -> float:
    return model_for(cfg).perplexity(tokens, context)
