"""Tests for key files."""

import stat

import pytest

from branchwm.crypto.mac import keygen
from branchwm.errors import ConfigurationError
from branchwm.keys import load_optional_key, read_key_file, write_key_file


class TestKeyFiles:
    def test_round_trip(self, tmp_path):
        key = keygen(256)
        path = write_key_file(tmp_path / "k.key", key)
        assert read_key_file(path) == key
        assert path.read_text() == key.to_hex() + "\n"

    def test_owner_only_permissions(self, tmp_path):
        path = write_key_file(tmp_path / "k.key", keygen())
        assert stat.S_IMODE(path.stat().st_mode) == 0o600

    def test_refuses_overwrite(self, tmp_path):
        path = write_key_file(tmp_path / "k.key", keygen())
        with pytest.raises(ConfigurationError):
            write_key_file(path, keygen())
        write_key_file(path, keygen(), overwrite=True)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            read_key_file(tmp_path / "absent.key")

    def test_trailing_newline_optional(self, tmp_path):
        path = tmp_path / "k.key"
        path.write_text("ab" * 16)
        assert read_key_file(path).bit_length == 128

    @pytest.mark.parametrize(
        "content",
        ["AB" * 16, "0x" + "ab" * 16, "ab" * 16 + "\n" + "ab" * 16, "ab" * 10, "", "zz" * 16],
    )
    def test_malformed(self, tmp_path, content):
        path = tmp_path / "k.key"
        path.write_text(content)
        with pytest.raises(ConfigurationError):
            read_key_file(path)

    def test_optional(self, tmp_path):
        assert load_optional_key(None) is None
        path = write_key_file(tmp_path / "k.key", keygen(128))
        assert load_optional_key(path).bit_length == 128
