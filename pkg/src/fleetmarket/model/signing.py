"""Detached package signatures behind a pluggable scheme identifier.

Signature strings have the form ``<scheme>:<key_id>:<hex>``. The default
scheme is Ed25519, which is deterministic: signing the same bytes with
the same key always yields the same signature, a property the rest of
the pipeline relies on for reproducible runs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

SCHEME_ED25519 = "ed25519"


@dataclass(frozen=True, slots=True)
class PublicKey:
    key_id: str
    scheme: str
    data: bytes  # raw 32-byte Ed25519 public key


def parse_signature(signature: str) -> tuple[str, str, str]:
    """Split a signature string into (scheme, key_id, hex_signature)."""
    parts = signature.split(":")
    if len(parts) != 3 or not all(parts):
        raise ValueError(f"malformed signature string {signature!r}")
    return parts[0], parts[1], parts[2]


class SigningKey:
    """Per-producer private key; sign() emits the full signature string."""

    def __init__(self, key_id: str, private: Ed25519PrivateKey):
        self.key_id = key_id
        self._private = private

    @classmethod
    def generate(cls, key_id: str) -> "SigningKey":
        return cls(key_id, Ed25519PrivateKey.generate())

    @classmethod
    def from_seed(cls, key_id: str, seed: bytes) -> "SigningKey":
        """Derive a key deterministically from arbitrary seed bytes."""
        material = hashlib.sha256(seed).digest()
        return cls(key_id, Ed25519PrivateKey.from_private_bytes(material))

    def sign(self, data: bytes) -> str:
        sig = self._private.sign(data)
        return f"{SCHEME_ED25519}:{self.key_id}:{sig.hex()}"

    @property
    def public(self) -> PublicKey:
        from cryptography.hazmat.primitives.serialization import (
            Encoding,
            PublicFormat,
        )

        raw = self._private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        return PublicKey(self.key_id, SCHEME_ED25519, raw)


def verify_with_key(public: PublicKey, signature: str, data: bytes) -> tuple[bool, str]:
    """Check a signature string against one known public key."""
    try:
        scheme, key_id, hexsig = parse_signature(signature)
    except ValueError as exc:
        return False, str(exc)
    if scheme != public.scheme:
        return False, f"unsupported scheme {scheme!r}"
    if key_id != public.key_id:
        return False, f"signature key {key_id!r} does not match {public.key_id!r}"
    try:
        Ed25519PublicKey.from_public_bytes(public.data).verify(bytes.fromhex(hexsig), data)
    except (InvalidSignature, ValueError):
        return False, "signature does not verify"
    return True, ""


class KeyRegistry:
    """Known producer public keys, looked up by the key id in the signature."""

    def __init__(self, keys: list[PublicKey] | None = None):
        self._keys: dict[str, PublicKey] = {}
        for key in keys or []:
            self.add(key)

    def add(self, public: PublicKey) -> None:
        self._keys[public.key_id] = public

    def get(self, key_id: str) -> PublicKey | None:
        return self._keys.get(key_id)

    def public_keys(self) -> list[PublicKey]:
        return sorted(self._keys.values(), key=lambda k: k.key_id)

    def verify(self, signature: str, data: bytes) -> tuple[bool, str]:
        try:
            _, key_id, _ = parse_signature(signature)
        except ValueError as exc:
            return False, str(exc)
        public = self._keys.get(key_id)
        if public is None:
            return False, f"unknown signing key {key_id!r}"
        return verify_with_key(public, signature, data)
