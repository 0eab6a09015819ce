"""Data encapsulation for signcrypted payloads.

The KEM side lives in the scheme (a random target element masked by
e(g,g)^z); this module turns that element into an AEAD key and seals the
payload. Algorithm identifiers travel in the ciphertext header.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM, ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import AuthenticationFailure, ConfigurationError, EncodingError

logger = logging.getLogger(__name__)

KEY_SIZE = 32
NONCE_SIZE = 12
TAG_SIZE = 16
KDF_INFO = b"mabs-grid/v1 payload key"


class KdfId(IntEnum):
    HKDF_SHA256 = 0x01


class AeadId(IntEnum):
    AES_256_GCM = 0x01
    CHACHA20_POLY1305 = 0x02


_KDF_NAMES = {"hkdf-sha256": KdfId.HKDF_SHA256}
_AEAD_NAMES = {
    "aes-256-gcm": AeadId.AES_256_GCM,
    "chacha20-poly1305": AeadId.CHACHA20_POLY1305,
}


def kdf_from_name(name: str) -> KdfId:
    try:
        return _KDF_NAMES[name.lower()]
    except KeyError:
        raise ConfigurationError(f"unknown kdf {name!r}; expected one of {sorted(_KDF_NAMES)}")


def aead_from_name(name: str) -> AeadId:
    try:
        return _AEAD_NAMES[name.lower()]
    except KeyError:
        raise ConfigurationError(f"unknown aead {name!r}; expected one of {sorted(_AEAD_NAMES)}")


@dataclass(frozen=True)
class AeadHeader:
    kdf: KdfId
    aead: AeadId
    nonce: bytes

    def encode(self) -> bytes:
        return struct.pack(">BBH", int(self.kdf), int(self.aead), len(self.nonce)) + self.nonce

    @classmethod
    def decode_prefix(cls, data: bytes, offset: int = 0) -> Tuple["AeadHeader", int]:
        if len(data) - offset < 4:
            raise EncodingError("truncated AEAD header")
        kdf, aead, length = struct.unpack_from(">BBH", data, offset)
        try:
            header = cls(KdfId(kdf), AeadId(aead), b"")
        except ValueError as exc:
            raise EncodingError(f"unsupported algorithm identifier: {exc}")
        start = offset + 4
        if start + length > len(data):
            raise EncodingError("truncated nonce")
        if length != NONCE_SIZE:
            raise EncodingError(f"nonce must be {NONCE_SIZE} bytes, got {length}")
        return cls(header.kdf, header.aead, bytes(data[start:start + length])), start + length


def derive_key(header: AeadHeader, secret: bytes) -> bytes:
    """Extract-then-expand the KEM element encoding into an AEAD key."""
    if header.kdf != KdfId.HKDF_SHA256:  # pragma: no cover - enum has one member
        raise ConfigurationError(f"unsupported kdf {header.kdf!r}")
    return HKDF(algorithm=hashes.SHA256(), length=KEY_SIZE, salt=None, info=KDF_INFO).derive(secret)


def _cipher(header: AeadHeader, key: bytes):
    if header.aead == AeadId.CHACHA20_POLY1305:
        return ChaCha20Poly1305(key)
    return AESGCM(key)


def seal(header: AeadHeader, key: bytes, plaintext: bytes, aad: bytes) -> Tuple[bytes, bytes]:
    """Encrypt; returns (body, tag)."""
    sealed = _cipher(header, key).encrypt(header.nonce, plaintext, aad)
    return sealed[:-TAG_SIZE], sealed[-TAG_SIZE:]


def open_sealed(header: AeadHeader, key: bytes, body: bytes, tag: bytes, aad: bytes) -> bytes:
    try:
        return _cipher(header, key).decrypt(header.nonce, body + tag, aad)
    except InvalidTag:
        logger.debug("Payload authentication failed")
        raise AuthenticationFailure("payload authentication failed")
