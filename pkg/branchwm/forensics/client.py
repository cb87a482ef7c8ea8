"""Probe targets: a remote API over HTTP or a service object in this process."""

import httpx

from ..errors import BackendError
from ..gateway.service import BareBackendService, GenerateRequest, GenerateResponse


class HttpTarget:
    """Suspect generation API reached at endpoint (base URL)."""

    def __init__(self, endpoint: str, timeout: float = 30.0, client: httpx.Client | None = None):
        self.endpoint = endpoint.rstrip("/")
        self.client = client or httpx.Client(timeout=timeout)

    @property
    def name(self) -> str:
        return self.endpoint

    def generate(self, prompt: str, max_tokens: int) -> GenerateResponse:
        """POST /v1/generate.

        Raises:
            BackendError: On transport failure, a non-2xx status or a bad body.
        """
        try:
            response = self.client.post(
                f"{self.endpoint}/v1/generate", json={"prompt": prompt, "max_tokens": max_tokens}
            )
            response.raise_for_status()
            return GenerateResponse.model_validate(response.json())
        except httpx.HTTPStatusError as e:
            raise BackendError(f"{self.endpoint} answered {e.response.status_code}") from e
        except httpx.HTTPError as e:
            raise BackendError(f"{self.endpoint} unreachable: {e}") from e
        except ValueError as e:
            raise BackendError(f"{self.endpoint} sent a malformed reply: {e}") from e

    def healthy(self) -> bool:
        try:
            return self.client.get(f"{self.endpoint}/healthz").text == "ok"
        except httpx.HTTPError:
            return False

    def close(self) -> None:
        self.client.close()


class ServiceTarget:
    """A gateway or bare backend called directly, without HTTP."""

    def __init__(self, service: BareBackendService, name: str = "in-process"):
        self.service = service
        self._name = name

    @property
    def name(self) -> str:
        return self._name

    def generate(self, prompt: str, max_tokens: int) -> GenerateResponse:
        return self.service.handle_generate(GenerateRequest(prompt=prompt, max_tokens=max_tokens))

    def close(self) -> None:
        pass
