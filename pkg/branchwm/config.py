"""Gateway configuration: flat key = value file with BWM_ environment overrides."""

import logging
import os
import re
from collections.abc import Mapping
from dataclasses import dataclass, fields
from pathlib import Path

from .crypto.mac import DEFAULT_TAG_BITS, DIGEST_BITS, SecretKey
from .errors import ConfigurationError
from .keys import load_optional_key
from .lm.toy import DEFAULT_CONTEXT_WINDOW, DEFAULT_MODEL_SEED, LmConfig
from .models import ConcealParams, CopyrightMessage
from .scheme.simple import DEFAULT_PROCLAMATION
from .text.vocab import Vocab

logger = logging.getLogger(__name__)

ENV_PREFIX = "BWM_"
DEFAULT_COPYRIGHT = "10110010100111000101101100111010"

LINE_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")
LISTEN_RE = re.compile(r"^(?P<host>[^\s:]+|\[[0-9a-fA-F:]+\]):(?P<port>\d{1,5})$")

TRUE_WORDS = {"true", "yes", "1", "on"}
FALSE_WORDS = {"false", "no", "0", "off"}


class Mode:
    SIMPLE = "simple"
    CONCEALED = "concealed"
    ALL = (SIMPLE, CONCEALED)


@dataclass
class GatewayConfig:
    """Everything needed to deploy a gateway or run the forensic tools."""

    mode: str = Mode.SIMPLE
    mac_key: str | None = None
    ek_in: str | None = None
    ek_out: str | None = None
    copyright: str = DEFAULT_COPYRIGHT
    delta: float = 11.0
    j: int = 4
    proclamation: str = DEFAULT_PROCLAMATION
    backend: str = "toy"
    model_seed: int = DEFAULT_MODEL_SEED
    context_window: int = DEFAULT_CONTEXT_WINDOW
    vocab: str | None = None
    tag_bits: int = DEFAULT_TAG_BITS
    max_tokens_cap: int = 1024
    default_max_tokens: int = 256
    one_time_registry: bool = False
    bind_evidence_key: bool = False
    timestamp_evidence: bool = False
    timestamp_window_minutes: int = 10
    threshold: float = 0.9
    listen: str = "127.0.0.1:8080"
    debug: bool = False

    # Derived views

    def load_vocab(self) -> Vocab:
        return Vocab.from_file(self.vocab) if self.vocab else Vocab.default()

    def lm_config(self) -> LmConfig:
        return LmConfig(
            model_seed=self.model_seed, vocab=self.load_vocab(), context_window=self.context_window
        )

    def message(self) -> CopyrightMessage:
        return CopyrightMessage.from_string(self.copyright)

    def load_mac_key(self) -> SecretKey:
        return _required_key("mac_key", self.mac_key)

    def conceal_params(self) -> ConcealParams:
        return ConcealParams(
            ek_in=_required_key("ek_in", self.ek_in),
            ek_out=_required_key("ek_out", self.ek_out),
            message=self.message(),
            delta=self.delta,
            j=self.j,
            bind_evidence_key=self.bind_evidence_key,
            timestamp_evidence=self.timestamp_evidence,
        )

    @property
    def is_remote_backend(self) -> bool:
        return self.backend.startswith(("http://", "https://"))

    def listen_address(self) -> tuple[str, int]:
        """(host, port) parsed from listen.

        Raises:
            ConfigurationError: If listen is not host:port with a port in 0..65535.
        """
        match = LISTEN_RE.match(self.listen.strip())
        if not match or int(match.group("port")) > 65535:
            raise ConfigurationError(f"Invalid listen address: {self.listen!r}")
        return match.group("host").strip("[]"), int(match.group("port"))

    def validate(self) -> None:
        """Check values and key files for the selected mode.

        Raises:
            ConfigurationError: On the first invalid value or unreadable key.
        """
        if self.mode not in Mode.ALL:
            raise ConfigurationError(f"mode must be one of {Mode.ALL}, got {self.mode!r}")
        if self.tag_bits % 8 or not 8 <= self.tag_bits <= DIGEST_BITS:
            raise ConfigurationError(
                f"tag_bits must be a multiple of 8 in 8..{DIGEST_BITS}, got {self.tag_bits}"
            )
        if not 0.5 < self.threshold <= 1.0:
            raise ConfigurationError(f"threshold must lie in (0.5, 1], got {self.threshold}")
        if not 1 <= self.default_max_tokens <= self.max_tokens_cap:
            raise ConfigurationError("default_max_tokens must lie in 1..max_tokens_cap")
        if self.timestamp_window_minutes < 0:
            raise ConfigurationError("timestamp_window_minutes must be >= 0")
        self.listen_address()

        vocab = self.load_vocab()
        self.lm_config()
        self.load_mac_key()
        if self.mode == Mode.CONCEALED:
            self.conceal_params().validate(vocab.size)
        elif self.delta < 0:
            raise ConfigurationError(f"delta must be >= 0, got {self.delta}")


def _required_key(name: str, path: str | None) -> SecretKey:
    key = load_optional_key(path)
    if key is None:
        raise ConfigurationError(f"Configuration is missing the {name} key file")
    return key


def _coerce(name: str, raw: str, kind: type):
    try:
        if kind is bool:
            word = raw.strip().lower()
            if word in TRUE_WORDS:
                return True
            if word in FALSE_WORDS:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind is int:
            return int(raw, 0)
        if kind is float:
            return float(raw)
    except ValueError as e:
        raise ConfigurationError(f"Invalid value for {name}: {e}") from e
    return raw


_FIELD_TYPES: dict[str, type] = {
    f.name: f.type if f.type in (bool, int, float) else str for f in fields(GatewayConfig)
}


def parse_config(content: str) -> dict[str, str]:
    """Raw key/value pairs of a config file; later keys override earlier ones.

    Raises:
        ConfigurationError: On a line that is neither a comment nor key = value.
    """
    values: dict[str, str] = {}
    for lineno, line in enumerate(content.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = LINE_RE.match(line)
        if not match:
            raise ConfigurationError(f"Config line {lineno} is not key = value: {line!r}")
        values[match.group(1).lower()] = match.group(2)
    return values


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    **overrides,
) -> GatewayConfig:
    """Build a GatewayConfig from a file, BWM_ environment variables and overrides.

    Precedence, lowest first: defaults, file, environment, keyword overrides.

    Raises:
        ConfigurationError: If the file is missing or a key is unknown or ill-typed.
    """
    env = os.environ if env is None else env
    raw: dict[str, str] = {}

    if path is not None:
        path = Path(path).expanduser()
        if not path.exists():
            raise ConfigurationError(f"Config file not found: {path}")
        raw.update(parse_config(path.read_text(encoding="utf-8")))
        logger.debug("loaded %d config keys from %s", len(raw), path)

    for name, value in env.items():
        if name.startswith(ENV_PREFIX):
            raw[name[len(ENV_PREFIX) :].lower()] = value

    unknown = sorted(set(raw) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigurationError(f"Unknown config keys: {', '.join(unknown)}")

    values = {name: _coerce(name, value, _FIELD_TYPES[name]) for name, value in raw.items()}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return GatewayConfig(**values)
