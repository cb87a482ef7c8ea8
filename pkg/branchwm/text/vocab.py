"""Reversible toy vocabulary and tokenizer."""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cache
from importlib import resources
from pathlib import Path

from ..errors import ConfigurationError, TokenizationError

SEPARATOR = " "
DEFAULT_VOCAB_RESOURCE = "vocab.txt"


@dataclass(frozen=True)
class Vocab:
    """Bijection between token ids 0..v-1 and surface strings."""

    tokens: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.tokens) < 2:
            raise ConfigurationError("Vocabulary needs at least 2 tokens")
        index: dict[str, int] = {}
        for token_id, token in enumerate(self.tokens):
            if not token or SEPARATOR in token or "\n" in token:
                raise ConfigurationError(f"Invalid surface string at id {token_id}: {token!r}")
            if token in index:
                raise ConfigurationError(f"Duplicate surface string {token!r}")
            index[token] = token_id
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise TokenizationError(f"Unknown token {token!r}") from None

    @classmethod
    def synthetic(cls, size: int) -> "Vocab":
        """The tok_<id> vocabulary of the given size."""
        return cls(tokens=tuple(f"tok_{i}" for i in range(size)))

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Vocab":
        """Build from one surface string per line; line number is the token id."""
        return cls(tokens=tuple(line.rstrip("\r\n") for line in lines))

    @classmethod
    def from_file(cls, path: str | Path) -> "Vocab":
        """Load a vocabulary file.

        Raises:
            ConfigurationError: If the file is missing or malformed.
        """
        path = Path(path).expanduser()
        if not path.exists():
            raise ConfigurationError(f"Vocabulary file not found: {path}")
        with open(path, encoding="utf-8") as f:
            return cls.from_lines(f.read().splitlines())

    @classmethod
    def default(cls) -> "Vocab":
        """The bundled 256-word vocabulary."""
        return _bundled_vocab()


@cache
def _bundled_vocab() -> Vocab:
    text = resources.files("branchwm.data").joinpath(DEFAULT_VOCAB_RESOURCE).read_text("utf-8")
    return Vocab.from_lines(text.splitlines())


def tok_encode(text: str, vocab: Vocab) -> list[int]:
    """Split text on the separator and map each surface string to its id.

    Raises:
        TokenizationError: If any piece is not in the vocabulary.
    """
    if text == "":
        return []
    return [vocab.id_of(piece) for piece in text.split(SEPARATOR)]


def tok_decode(ids: Sequence[int], vocab: Vocab) -> str:
    """Join the surface strings of ids with the separator.

    Raises:
        TokenizationError: If an id is outside 0..v-1.
    """
    pieces = []
    for token_id in ids:
        if not 0 <= token_id < vocab.size:
            raise TokenizationError(f"Token id {token_id} outside vocabulary of size {vocab.size}")
        pieces.append(vocab.tokens[token_id])
    return SEPARATOR.join(pieces)


def ids_to_bytes(ids: Sequence[int]) -> bytes:
    """Fixed-width big-endian encoding of token ids, used as hash input."""
    return b"".join(int(i).to_bytes(4, "big") for i in ids)
