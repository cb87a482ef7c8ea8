"""Shared fixtures: fixed keys, the default vocabulary and config factories."""

import pytest

from branchwm.config import GatewayConfig
from branchwm.crypto.mac import SecretKey
from branchwm.keys import write_key_file
from branchwm.lm.toy import LmConfig, model_for
from branchwm.models import ConcealParams, CopyrightMessage
from branchwm.text.vocab import Vocab

# Short tags keep large trial counts fast; acceptance round trips use 512.
FAST_TAG_BITS = 64
COPYRIGHT = "10110010100111000101101100111010"


@pytest.fixture
def mac_key():
    return SecretKey.from_bytes(bytes(range(128)))


@pytest.fixture
def other_key():
    return SecretKey.from_bytes(bytes(range(128, 256)))


@pytest.fixture
def ek_in():
    return SecretKey.from_bytes(b"\x11" * 64)


@pytest.fixture
def ek_out():
    return SecretKey.from_bytes(b"\x22" * 64)


@pytest.fixture
def vocab():
    return Vocab.default()


@pytest.fixture
def lm():
    return model_for(LmConfig())


@pytest.fixture
def params(ek_in, ek_out):
    return ConcealParams(ek_in=ek_in, ek_out=ek_out, message=CopyrightMessage.from_string(COPYRIGHT))


@pytest.fixture
def key_files(tmp_path, mac_key, ek_in, ek_out):
    """Key files for the fixed keys, as config paths."""
    return {
        "mac_key": str(write_key_file(tmp_path / "mac.key", mac_key)),
        "ek_in": str(write_key_file(tmp_path / "ek_in.key", ek_in)),
        "ek_out": str(write_key_file(tmp_path / "ek_out.key", ek_out)),
    }


@pytest.fixture
def make_config(key_files):
    """GatewayConfig factory with every key configured and short tags."""

    def factory(**overrides) -> GatewayConfig:
        values = {**key_files, "tag_bits": FAST_TAG_BITS, "default_max_tokens": 128}
        values.update(overrides)
        return GatewayConfig(**values)

    return factory
