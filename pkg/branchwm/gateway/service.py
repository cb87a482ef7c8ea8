"""Request handling for the watermarked gateway and the bare backend."""

import logging
import time
import uuid
from collections import deque
from collections.abc import Callable

from pydantic import BaseModel, Field

from ..config import GatewayConfig, Mode
from ..errors import TokenizationError
from ..lm.sampling import Backend, generate
from ..models import ApiState, DetectionResult, RegistryOutcome, RequestRecord
from ..scheme.concealed import ConcealedScheme
from ..scheme.simple import SimpleScheme
from ..text.vocab import Vocab, tok_decode, tok_encode
from .backend import LocalBackend, RemoteBackend
from .registry import OneTimeRegistry, fingerprint

logger = logging.getLogger(__name__)

# Request records kept by debug gateways.
RECORD_HISTORY = 1024


class GenerateRequest(BaseModel):
    prompt: str
    max_tokens: int | None = Field(default=None, ge=1)


class GenerateResponse(BaseModel):
    text: str
    tokens: list[int]
    state: str | None = None


class RequestTooLarge(ValueError):
    """max_tokens above the configured cap."""


def backend_for(config: GatewayConfig, vocab: Vocab) -> Backend:
    if config.is_remote_backend:
        return RemoteBackend(config.backend, vocab.size)
    return LocalBackend(config.lm_config())


def unix_minute(clock: Callable[[], float] = time.time) -> int:
    return int(clock() // 60)


class BareBackendService:
    """The undeployed API: plain generation, no watermark module."""

    def __init__(
        self,
        backend: Backend,
        vocab: Vocab,
        max_tokens_cap: int = 1024,
        default_max_tokens: int = 256,
    ):
        self.backend = backend
        self.vocab = vocab
        self.max_tokens_cap = max_tokens_cap
        self.default_max_tokens = default_max_tokens
        self.debug = False

    def _budget(self, request: GenerateRequest) -> int:
        max_tokens = request.max_tokens or self.default_max_tokens
        if max_tokens > self.max_tokens_cap:
            raise RequestTooLarge(f"max_tokens {max_tokens} exceeds cap {self.max_tokens_cap}")
        return max_tokens

    def _serve(self, ids: list[int], max_tokens: int) -> GenerateResponse:
        tokens = generate(self.backend, ids, max_tokens)
        return GenerateResponse(text=tok_decode(tokens, self.vocab), tokens=tokens)

    def handle_generate(self, request: GenerateRequest) -> GenerateResponse:
        """Generate a continuation of the prompt.

        Raises:
            TokenizationError: If the prompt is not tokenizable.
            RequestTooLarge: If max_tokens exceeds the cap.
            BackendError: If the backend fails.
        """
        max_tokens = self._budget(request)
        return self._serve(tok_encode(request.prompt, self.vocab), max_tokens)


class WatermarkGateway(BareBackendService):
    """Backend wrapped with the inner watermark module (Detect + Prove)."""

    def __init__(
        self,
        config: GatewayConfig,
        backend: Backend | None = None,
        clock: Callable[[], float] = time.time,
    ):
        config.validate()
        vocab = config.load_vocab()
        super().__init__(
            backend or backend_for(config, vocab),
            vocab,
            config.max_tokens_cap,
            config.default_max_tokens,
        )
        self.config = config
        self.debug = config.debug
        self.clock = clock
        self.registry = OneTimeRegistry() if config.one_time_registry else None
        self.records: deque[RequestRecord] = deque(maxlen=RECORD_HISTORY)

        key = config.load_mac_key()
        self.simple: SimpleScheme | None = None
        self.concealed: ConcealedScheme | None = None
        if config.mode == Mode.SIMPLE:
            self.simple = SimpleScheme(key, vocab, config.tag_bits, config.proclamation)
        else:
            self.concealed = ConcealedScheme(
                key, config.conceal_params(), self.backend, vocab, config.tag_bits, config.threshold
            )

    def detect(self, ids: list[int]) -> DetectionResult:
        if self.simple is not None:
            return self.simple.detect_ids(ids)
        return self.concealed.detect(ids)

    def _state_for(self, detection: DetectionResult) -> ApiState:
        if not detection:
            return ApiState.SERVICE
        if self.registry is not None:
            if self.registry.check_and_insert(detection.extracted_tag) is RegistryOutcome.REPLAYED:
                return ApiState.SERVICE
        return ApiState.FORENSIC

    def _prove(self, ids: list[int], detection: DetectionResult, max_tokens: int) -> GenerateResponse:
        if self.simple is not None:
            proclamation = self.simple.proclamation
            try:
                tokens = tok_encode(proclamation, self.vocab)
            except TokenizationError:
                tokens = []
            return GenerateResponse(text=proclamation, tokens=tokens)

        minute = unix_minute(self.clock) if self.config.timestamp_evidence else None
        processor = self.concealed.processor(detection.extracted_tag, minute)
        tokens = generate(self.backend, ids, max_tokens, processor)
        return GenerateResponse(text=tok_decode(tokens, self.vocab), tokens=tokens)

    def handle_generate(self, request: GenerateRequest) -> GenerateResponse:
        """Detect, then serve either the backend output or the evidence.

        Raises:
            TokenizationError: If the prompt is not tokenizable.
            RequestTooLarge: If max_tokens exceeds the cap.
            BackendError: If the backend fails.
        """
        max_tokens = self._budget(request)
        ids = tok_encode(request.prompt, self.vocab)
        detection = self.detect(ids)
        state = self._state_for(detection)

        record = RequestRecord(
            request_id=uuid.uuid4().hex,
            prompt=request.prompt,
            state=state,
            timestamp=self.clock(),
            fingerprint=fingerprint(detection.extracted_tag) if detection else None,
        )
        if self.debug:
            self.records.append(record)
        if state is ApiState.FORENSIC:
            logger.debug("forensic activation %s", record.request_id)
            response = self._prove(ids, detection, max_tokens)
        else:
            response = self._serve(ids, max_tokens)

        if self.debug:
            response.state = state.value
        return response
