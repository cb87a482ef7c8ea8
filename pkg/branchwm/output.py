"""Output formatting for CLI - CSV reports, key/value records and JSON."""

import csv
import io
import json
from typing import Any

import click


def _scalar(value: Any) -> str:
    """Render one value for CSV cells and records.

    - None -> empty string
    - bool -> true / false
    - list/tuple -> items joined by spaces
    - float -> repr-precise decimal
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return " ".join(_scalar(item) for item in value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    return str(value)


def to_csv(rows: list[dict[str, Any]]) -> str:
    """Render rows as CSV with a header row taken from the first row's keys.

    Keys missing from later rows are left empty; extra keys are an error.
    """
    if not rows:
        return ""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _scalar(value) for key, value in row.items()})
    return buffer.getvalue().rstrip("\n")


def to_records(data: dict[str, Any]) -> str:
    """Render a flat mapping as ``key: value`` lines, keys in kebab-case."""
    return "\n".join(f"{_to_kebab_case(key)}: {_scalar(value)}" for key, value in data.items())


def _to_kebab_case(s: str) -> str:
    """Convert snake_case or camelCase to kebab-case.

    Examples:
        tag_bits -> tag-bits
        meanNs -> mean-ns
    """
    result = []
    for i, char in enumerate(s):
        if char == "_":
            result.append("-")
        elif char.isupper():
            if i > 0:
                result.append("-")
            result.append(char.lower())
        else:
            result.append(char)
    return "".join(result)


def format_output(data: Any, *, use_json: bool = False, pretty: bool = True) -> str:
    """Format data for output based on format preference.

    Args:
        data: A mapping (rendered as records) or a list of mappings (CSV).
        use_json: If True, output JSON instead.
        pretty: If True, indent JSON.

    Returns:
        Formatted string.
    """
    if use_json:
        if pretty:
            return json.dumps(data, indent=2)
        return json.dumps(data)

    if isinstance(data, list):
        return to_csv(data)
    if isinstance(data, dict):
        return to_records(data)
    return _scalar(data)


def print_output(data: Any, *, use_json: bool = False, pretty: bool = True, err: bool = False) -> None:
    """Print formatted output to stdout (stderr with err=True)."""
    click.echo(format_output(data, use_json=use_json, pretty=pretty), err=err)
