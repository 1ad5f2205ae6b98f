"""Owner consent records and their precedence rule.

Sharing is opt-in: with no record at all, nothing leaves the vault. A
specific channel record overrides a wildcard record; within one key the
latest update wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

WILDCARD = "*"


@dataclass(frozen=True, slots=True)
class ConsentRecord:
    owner_id: str
    channel_id: str  # a channel id or "*"
    granted: bool
    updated_at_ms: int


def upsert_consent(records: dict[str, ConsentRecord], record: ConsentRecord) -> None:
    """Keep at most one record per channel key; latest update wins."""
    existing = records.get(record.channel_id)
    if existing is None or record.updated_at_ms >= existing.updated_at_ms:
        records[record.channel_id] = record


def consent_allows(records: Iterable[ConsentRecord], channel_id: str) -> bool:
    """Decide whether a channel may be shared given the owner's records."""
    specific = None
    wildcard = None
    for rec in records:
        if rec.channel_id == channel_id:
            if specific is None or rec.updated_at_ms >= specific.updated_at_ms:
                specific = rec
        elif rec.channel_id == WILDCARD:
            if wildcard is None or rec.updated_at_ms >= wildcard.updated_at_ms:
                wildcard = rec
    if specific is not None:
        return specific.granted
    if wildcard is not None:
        return wildcard.granted
    return False
