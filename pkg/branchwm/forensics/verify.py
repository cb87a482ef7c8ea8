"""Owner-side outer module: trigger issuing, offline Detect and Verify, probing."""

import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from ..config import GatewayConfig, Mode
from ..crypto.mac import SecretKey
from ..errors import BackendError, TokenizationError
from ..gateway.backend import LocalBackend
from ..gateway.service import GenerateResponse, unix_minute
from ..lm.sampling import Backend
from ..models import (
    ConcealParams,
    DetectionResult,
    ExtractionReport,
    IssuedTrigger,
    ProbeResult,
    Verdict,
)
from ..scheme.concealed import ConcealedScheme, verify_concealed
from ..scheme.simple import DEFAULT_PROCLAMATION, NOT_A_TRIGGER, SimpleScheme
from ..text.vocab import Vocab, tok_decode, tok_encode

logger = logging.getLogger(__name__)


@dataclass
class Owner:
    """Keys and parameters held by the model owner."""

    mode: str
    key: SecretKey
    vocab: Vocab
    tag_bits: int
    proclamation: str = DEFAULT_PROCLAMATION
    params: ConcealParams | None = None
    lm: Backend | None = None
    threshold: float = 0.9
    window_minutes: int = 10
    clock: Callable[[], float] = time.time

    def __post_init__(self):
        self.simple: SimpleScheme | None = None
        self.concealed: ConcealedScheme | None = None
        if self.mode == Mode.SIMPLE:
            self.simple = SimpleScheme(self.key, self.vocab, self.tag_bits, self.proclamation)
        else:
            self.concealed = ConcealedScheme(
                self.key, self.params, self.lm, self.vocab, self.tag_bits, self.threshold
            )

    @classmethod
    def from_config(cls, config: GatewayConfig, lm: Backend | None = None) -> "Owner":
        """Owner for a config; the concealed scheme generates triggers with the toy model."""
        concealed = config.mode == Mode.CONCEALED
        return cls(
            mode=config.mode,
            key=config.load_mac_key(),
            vocab=config.load_vocab(),
            tag_bits=config.tag_bits,
            proclamation=config.proclamation,
            params=config.conceal_params() if concealed else None,
            lm=(lm or LocalBackend(config.lm_config())) if concealed else None,
            threshold=config.threshold,
            window_minutes=config.timestamp_window_minutes,
        )

    # TriggerGen

    def trigger(self, prompt: str) -> IssuedTrigger:
        """Issue a trigger for prompt.

        Raises:
            TokenizationError: If the prompt is empty or not tokenizable.
        """
        if self.simple is not None:
            text = self.simple.trigger_gen(prompt)
            return IssuedTrigger(prompt=prompt, text=text, ids=tuple(tok_encode(text, self.vocab)))
        ids = self.concealed.trigger_gen(prompt).ids
        return IssuedTrigger(prompt=prompt, text=tok_decode(ids, self.vocab), ids=tuple(ids))

    # Detect

    def detect_ids(self, ids: Sequence[int]) -> DetectionResult:
        if self.simple is not None:
            return self.simple.detect_ids(ids)
        return self.concealed.detect(ids)

    def detect_text(self, text: str) -> DetectionResult:
        try:
            ids = tok_encode(text, self.vocab)
        except TokenizationError:
            return NOT_A_TRIGGER
        return self.detect_ids(ids)

    # Verify

    def extract(self, trigger_ids: Sequence[int], response_ids: Sequence[int]) -> ExtractionReport | None:
        """Evidence report for a concealed-mode response; None if the trigger is not ours."""
        detection = self.concealed.detect(trigger_ids)
        if not detection or not response_ids:
            return None
        return self.concealed.extract(response_ids, detection.extracted_tag, int(trigger_ids[-1]))

    def verify(self, trigger: IssuedTrigger | str, response: GenerateResponse) -> int:
        """1 iff the response carries valid evidence for the trigger."""
        text = trigger.text if isinstance(trigger, IssuedTrigger) else trigger
        if self.simple is not None:
            return self.simple.verify(text, response.text)

        try:
            trigger_ids = tok_encode(text, self.vocab)
        except TokenizationError:
            return 0
        report = self.extract(trigger_ids, response.tokens)
        if report is None:
            return 0
        now = unix_minute(self.clock) if self.params.timestamp_evidence else None
        return verify_concealed(self.params.message, report, self.threshold, now, self.window_minutes)


def probe(target, trigger: IssuedTrigger, owner: Owner, max_tokens: int) -> ProbeResult:
    """Send one trigger to a target and judge the response."""
    started = time.perf_counter()
    try:
        response = target.generate(trigger.text, max_tokens)
    except BackendError as e:
        logger.debug("probe of %s failed: %s", target.name, e)
        return ProbeResult(
            endpoint=target.name,
            trigger=trigger.text,
            raw_response="",
            verdict=Verdict.ERROR,
            latency_ms=(time.perf_counter() - started) * 1000,
            cause=str(e),
        )

    latency_ms = (time.perf_counter() - started) * 1000
    valid = owner.verify(trigger, response)
    return ProbeResult(
        endpoint=target.name,
        trigger=trigger.text,
        raw_response=response.text,
        verdict=Verdict.VALID_EVIDENCE if valid else Verdict.INVALID,
        latency_ms=latency_ms,
    )
