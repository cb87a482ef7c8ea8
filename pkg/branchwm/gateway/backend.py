"""Generation backends: the in-process toy model or a remote logits endpoint."""

from collections.abc import Sequence

import httpx
import numpy as np

from ..errors import BackendError
from ..lm.toy import LmConfig, ToyLM, model_for


class LocalBackend:
    """Toy model served from this process."""

    def __init__(self, cfg: LmConfig | None = None):
        self.model: ToyLM = model_for(cfg or LmConfig())

    @property
    def vocab_size(self) -> int:
        return self.model.vocab_size

    def logits(self, history: Sequence[int]) -> np.ndarray:
        return self.model.logits(history)


class RemoteBackend:
    """Backend reached over HTTP through another service's POST /v1/logits."""

    def __init__(self, base_url: str, vocab_size: int, timeout: float = 10.0, client=None):
        self.base_url = base_url.rstrip("/")
        self._vocab_size = vocab_size
        self.client = client or httpx.Client(timeout=timeout)

    @property
    def vocab_size(self) -> int:
        return self._vocab_size

    def logits(self, history: Sequence[int]) -> np.ndarray:
        """Fetch scores for history.

        Raises:
            BackendError: If the endpoint is unreachable or replies with a bad body.
        """
        try:
            response = self.client.post(
                f"{self.base_url}/v1/logits", json={"ids": [int(i) for i in history]}
            )
            response.raise_for_status()
            scores = np.asarray(response.json()["logits"], dtype=np.float64)
        except httpx.HTTPError as e:
            raise BackendError(f"Backend request failed: {e}") from e
        except (KeyError, TypeError, ValueError) as e:
            raise BackendError(f"Malformed backend reply: {e}") from e

        if scores.shape != (self._vocab_size,):
            raise BackendError(
                f"Backend returned {scores.shape[0] if scores.ndim else 0} scores, "
                f"expected {self._vocab_size}"
            )
        return scores

    def close(self) -> None:
        self.client.close()
