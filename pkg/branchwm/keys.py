"""Key files: one line of lowercase hex, trailing newline optional."""

import logging
import os
from pathlib import Path

from .crypto.mac import SecretKey
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

CONFIG_DIR = Path.home() / ".config" / "branchwm"


def read_key_file(path: str | Path) -> SecretKey:
    """Load a key from disk.

    Args:
        path: Path to the key file.

    Returns:
        The parsed key.

    Raises:
        ConfigurationError: If the file is missing, empty, not hex, or of a bad length.
    """
    path = Path(path).expanduser()
    if not path.exists():
        raise ConfigurationError(f"Key file not found: {path}")

    lines = path.read_text(encoding="ascii").splitlines()
    if len(lines) != 1 or not lines[0]:
        raise ConfigurationError(f"Key file must hold exactly one line of hex: {path}")

    line = lines[0]
    if line != line.lower() or line.startswith("0x"):
        raise ConfigurationError(f"Key file must be lowercase hex without prefix: {path}")

    try:
        return SecretKey.from_hex(line)
    except ConfigurationError as e:
        raise ConfigurationError(f"{path}: {e}") from e


def write_key_file(path: str | Path, key: SecretKey, *, overwrite: bool = False) -> Path:
    """Write a key file readable only by its owner.

    Raises:
        ConfigurationError: If the file exists and overwrite is False.
    """
    path = Path(path).expanduser()
    if path.exists() and not overwrite:
        raise ConfigurationError(f"Refusing to overwrite existing key file: {path}")

    path.parent.mkdir(parents=True, exist_ok=True)
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w", encoding="ascii") as f:
        f.write(key.to_hex() + "\n")
    logger.debug("wrote %d-bit key to %s", key.bit_length, path)
    return path


def load_optional_key(path: str | Path | None) -> SecretKey | None:
    """Read a key file when a path is configured."""
    if not path:
        return None
    return read_key_file(path)
