"""Canonical byte encoding shared by every service in the pipeline.

One rule set for everything that crosses a process boundary: UTF-8 JSON
with lexicographically sorted object keys, no insignificant whitespace,
floats rendered as shortest round-trip decimals and integers undecorated.
Equal values always encode to identical bytes, so checksums and
signatures can be computed directly over the encoding.
"""

from __future__ import annotations

import json
from typing import Any

__all__ = ["CanonicalError", "ParseError", "SchemaError", "encode", "decode"]


class CanonicalError(ValueError):
    """Base class for canonical encoding and decoding failures."""


class ParseError(CanonicalError):
    """Input bytes are not a canonical document; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SchemaError(CanonicalError):
    """Document parsed but violates the expected schema; carries the field path."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def encode(value: Any) -> bytes:
    """Encode a plain Python value (dict/list/str/int/float/bool/None)."""
    try:
        text = json.dumps(
            value,
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
            allow_nan=False,
        )
    except ValueError as exc:
        raise CanonicalError(str(exc)) from exc
    return text.encode("utf-8")


def _reject_constant(token: str) -> Any:
    raise ValueError(f"non-finite number {token!r}")


def decode(data: bytes) -> Any:
    """Decode canonical bytes; raises ParseError with the byte offset on failure."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("invalid UTF-8", exc.start) from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        # JSONDecodeError positions are in characters; report bytes.
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(exc.msg, offset) from exc
    except ValueError as exc:
        raise ParseError(str(exc), 0) from exc
