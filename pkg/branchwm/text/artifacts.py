"""Trigger artifact files.

Concealed triggers use the BWM1 interchange format::

    BWM1 <v> <tag_bits>
    <id> <id> <id> ...        one record per line

Simple triggers are stored as their surface string on a single line.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError

MAGIC = "BWM1"
HEADER_RE = re.compile(r"^BWM1 (\d+) (\d+)$")
RECORD_RE = re.compile(r"^\d+( \d+)*$")


@dataclass
class TriggerArtifact:
    """Token-id trigger records sharing one vocabulary size and tag length."""

    vocab_size: int
    tag_bits: int
    records: list[list[int]] = field(default_factory=list)


class ArtifactParser:
    """Parse BWM1 interchange text."""

    def parse_file(self, path: str | Path) -> TriggerArtifact:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Trigger artifact not found: {path}")
        with open(path, encoding="utf-8") as f:
            return self.parse_string(f.read())

    def parse_string(self, content: str) -> TriggerArtifact:
        """Parse interchange text.

        Raises:
            ConfigurationError: On a bad header, a bad record line, or an id >= v.
        """
        lines = [line for line in content.splitlines() if line.strip()]
        if not lines:
            raise ConfigurationError("Empty trigger artifact")

        header = HEADER_RE.match(lines[0].strip())
        if not header:
            raise ConfigurationError(f"Bad artifact header: {lines[0]!r}")

        artifact = TriggerArtifact(vocab_size=int(header.group(1)), tag_bits=int(header.group(2)))
        for lineno, line in enumerate(lines[1:], start=2):
            line = line.strip()
            if not RECORD_RE.match(line):
                raise ConfigurationError(f"Bad record on line {lineno}: {line!r}")
            ids = [int(piece) for piece in line.split(" ")]
            if any(i >= artifact.vocab_size for i in ids):
                raise ConfigurationError(
                    f"Record on line {lineno} has an id outside vocabulary size {artifact.vocab_size}"
                )
            artifact.records.append(ids)
        return artifact


class ArtifactWriter:
    """Serialize trigger artifacts."""

    def write_file(self, path: str | Path, artifact: TriggerArtifact) -> None:
        path = Path(path)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_string(artifact))

    def to_string(self, artifact: TriggerArtifact) -> str:
        lines = [f"{MAGIC} {artifact.vocab_size} {artifact.tag_bits}"]
        lines.extend(" ".join(str(i) for i in record) for record in artifact.records)
        return "\n".join(lines) + "\n"


def is_interchange(content: str) -> bool:
    """True when content starts with a BWM1 header."""
    return content.lstrip().startswith(MAGIC + " ")


def read_simple_trigger(path: str | Path) -> str:
    """Read a surface-string trigger file (single line)."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Trigger artifact not found: {path}")
    return path.read_text(encoding="utf-8").rstrip("\r\n")


def write_simple_trigger(path: str | Path, trigger: str) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="\n") as f:
        f.write(trigger + "\n")


def write_records(
    path: str | Path, vocab_size: int, tag_bits: int, records: list[list[int]]
) -> None:
    ArtifactWriter().write_file(path, TriggerArtifact(vocab_size, tag_bits, [list(r) for r in records]))


def read_records(path: str | Path) -> TriggerArtifact:
    return ArtifactParser().parse_file(path)
