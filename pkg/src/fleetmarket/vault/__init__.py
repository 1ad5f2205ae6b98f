"""Per-owner cloud vaults: isolated package storage plus consent control."""

from .consent import WILDCARD, ConsentRecord, consent_allows, upsert_consent
from .store import (
    MARKETPLACE_TOKEN,
    AuthorizationError,
    SequenceConflictError,
    StoreResult,
    ValidationRejected,
    VaultStore,
    owner_token,
)

__all__ = [
    "AuthorizationError",
    "ConsentRecord",
    "MARKETPLACE_TOKEN",
    "SequenceConflictError",
    "StoreResult",
    "ValidationRejected",
    "VaultStore",
    "WILDCARD",
    "consent_allows",
    "owner_token",
    "upsert_consent",
]
