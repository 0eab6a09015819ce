"""Binary encodings for ciphertexts and key material.

Ciphertext layout, all integers big-endian, variable fields length-prefixed::

    "MABS" | version u8 | flags u8 | policy block | C | rows (C1 C2 C3 C4)*
           | [B_x block: (present u8 | u32 len | bytes)* when revoked]
           | AEAD header | u32 len | payload | u32 len | tag

Group elements use the provider's ``role | u32 len | body`` framing.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

from .envelope import AeadHeader
from .errors import EncodingError, PolicyShapeError
from .models import KeyEnvelope, KeyKind
from .pairing import BilinearProvider, GroupElement, Role
from .policy import AccessPolicy
from .scheme import (
    AuthorityPublicKey,
    AuthoritySecretKey,
    CiphertextRow,
    DecryptionKey,
    GlobalParams,
    RevokedText,
    SigncryptedText,
    SignerKey,
    VerificationKey,
    locate_signer_row,
)

MAGIC = b"MABS"
VERSION = 1
FLAG_REVOKED = 0x01


def _blob(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def _text(value: str) -> bytes:
    return _blob(value.encode("utf-8"))


def _integer(value: int) -> bytes:
    if value < 0:
        raise EncodingError("negative integers have no wire form")
    return _blob(value.to_bytes((value.bit_length() + 7) // 8, "big"))


class _Reader:
    def __init__(self, data: bytes):
        self.data = bytes(data)
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise EncodingError(f"truncated input at byte {self.pos}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())

    def text(self) -> str:
        try:
            return self.blob().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(f"label is not UTF-8: {exc}")

    def integer(self) -> int:
        return int.from_bytes(self.blob(), "big")

    def scalar(self, order: int, nonzero: bool = True) -> int:
        value = self.integer()
        if not (1 if nonzero else 0) <= value < order:
            raise EncodingError("scalar out of range")
        return value

    def element(self, provider: BilinearProvider, role: Role) -> GroupElement:
        element, self.pos = provider.deserialize_prefix(self.data, self.pos)
        if element.role != role:
            raise EncodingError(f"expected a {role.name} element, got {element.role.name}")
        return element

    def policy(self, gp: GlobalParams) -> AccessPolicy:
        policy, self.pos = AccessPolicy.from_bytes_prefix(
            self.data, self.pos, gp.order, gp.controller
        )
        return policy

    def header(self) -> AeadHeader:
        header, self.pos = AeadHeader.decode_prefix(self.data, self.pos)
        return header

    def done(self) -> None:
        if self.pos != len(self.data):
            raise EncodingError(f"{len(self.data) - self.pos} trailing bytes")


# -- ciphertexts -----------------------------------------------------------------


def encode_ciphertext(provider: BilinearProvider, text: SigncryptedText) -> bytes:
    revoked = isinstance(text, RevokedText)
    out = bytearray(MAGIC)
    out += struct.pack(">BB", VERSION, FLAG_REVOKED if revoked else 0)
    out += text.policy.to_bytes()
    out += provider.serialize(text.c)
    for row in text.rows:
        for element in (row.c1, row.c2, row.c3, row.c4):
            out += provider.serialize(element)
    if revoked:
        for solution in text.crt_solutions:
            if solution is None:
                out += struct.pack(">BI", 0, 0)
            else:
                out += struct.pack(">B", 1) + _integer(solution)
    out += text.header.encode()
    out += _blob(text.payload)
    out += _blob(text.tag)
    return bytes(out)


def decode_ciphertext(gp: GlobalParams, data: bytes) -> SigncryptedText:
    """Parse either a signcrypted or a revoked text; signer row is re-derived from U_2."""
    provider = gp.provider
    reader = _Reader(data)
    if reader.take(4) != MAGIC:
        raise EncodingError("not a signcrypted text (bad magic)")
    version, flags = reader.u8(), reader.u8()
    if version != VERSION:
        raise EncodingError(f"unsupported ciphertext version {version}")
    if flags & ~FLAG_REVOKED:
        raise EncodingError(f"unknown flags 0x{flags:02x}")
    policy = reader.policy(gp)
    try:
        signer_row = locate_signer_row(gp, policy)
    except PolicyShapeError as exc:
        raise EncodingError(f"ciphertext policy has no valid signer row: {exc}")
    c = reader.element(provider, Role.TARGET)
    rows = [
        CiphertextRow(
            c1=reader.element(provider, Role.TARGET),
            c2=reader.element(provider, Role.SOURCE2),
            c3=reader.element(provider, Role.SOURCE2),
            c4=reader.element(provider, Role.SOURCE1),
        )
        for _ in range(policy.rows)
    ]
    solutions: List[Optional[int]] = []
    if flags & FLAG_REVOKED:
        for x in range(policy.rows):
            present = reader.u8()
            value = reader.integer()
            if present not in (0, 1) or (present == 0) != (x == signer_row):
                raise EncodingError(f"row {x} has an inconsistent CRT solution marker")
            solutions.append(value if present else None)
    header = reader.header()
    payload = reader.blob()
    tag = reader.blob()
    reader.done()
    text = SigncryptedText(policy, signer_row, c, tuple(rows), header, payload, tag)
    if flags & FLAG_REVOKED:
        return RevokedText.from_signcrypted(text, rows, solutions)
    return text


# -- keys ------------------------------------------------------------------------


def encode_authority_public(provider: BilinearProvider, key: AuthorityPublicKey) -> bytes:
    return _text(key.controller) + provider.serialize(key.e_gg_alpha) + provider.serialize(key.g_y)


def decode_authority_public(provider: BilinearProvider, data: bytes) -> AuthorityPublicKey:
    reader = _Reader(data)
    key = AuthorityPublicKey(
        reader.text(), reader.element(provider, Role.TARGET), reader.element(provider, Role.SOURCE2)
    )
    reader.done()
    return key


def encode_authority_secret(key: AuthoritySecretKey) -> bytes:
    return _text(key.controller) + _integer(key.alpha) + _integer(key.y)


def decode_authority_secret(provider: BilinearProvider, data: bytes) -> AuthoritySecretKey:
    reader = _Reader(data)
    key = AuthoritySecretKey(
        reader.text(), reader.scalar(provider.order), reader.scalar(provider.order)
    )
    reader.done()
    return key


def encode_signer_key(key: SignerKey) -> bytes:
    return _text(key.signer) + _text(key.identity_attribute) + _integer(key.alpha) + _integer(key.y)


def decode_signer_key(provider: BilinearProvider, data: bytes) -> SignerKey:
    reader = _Reader(data)
    key = SignerKey(
        reader.text(), reader.text(), reader.scalar(provider.order), reader.scalar(provider.order)
    )
    reader.done()
    return key


def encode_decryption_key(provider: BilinearProvider, key: DecryptionKey) -> bytes:
    return (
        _text(key.gid)
        + _text(key.attribute)
        + provider.serialize(key.k)
        + provider.serialize(key.k_prime)
    )


def decode_decryption_key(provider: BilinearProvider, data: bytes) -> DecryptionKey:
    reader = _Reader(data)
    key = DecryptionKey(
        reader.text(),
        reader.text(),
        reader.element(provider, Role.SOURCE1),
        reader.element(provider, Role.SOURCE2),
    )
    reader.done()
    return key


def encode_verification_key(provider: BilinearProvider, key: VerificationKey) -> bytes:
    return (
        _text(key.gid)
        + _text(key.signer)
        + _text(key.attribute)
        + provider.serialize(key.k)
        + provider.serialize(key.k_prime)
    )


def decode_verification_key(provider: BilinearProvider, data: bytes) -> VerificationKey:
    reader = _Reader(data)
    key = VerificationKey(
        reader.text(),
        reader.text(),
        reader.text(),
        reader.element(provider, Role.SOURCE1),
        reader.element(provider, Role.SOURCE2),
    )
    reader.done()
    return key


@dataclass
class Keyring:
    """Everything one meter holds: gid, q_i and its keys."""

    gid: str
    prime: Optional[int] = None
    verification_keys: Dict[str, VerificationKey] = field(default_factory=dict)
    decryption_keys: Dict[str, DecryptionKey] = field(default_factory=dict)

    def add(self, key: Union[DecryptionKey, VerificationKey]) -> None:
        if key.gid != self.gid:
            raise EncodingError(f"key for {key.gid!r} cannot join the keyring of {self.gid!r}")
        if isinstance(key, VerificationKey):
            self.verification_keys[key.signer] = key
        else:
            self.decryption_keys[key.attribute] = key

    def verification_key_for(self, signer: str) -> Optional[VerificationKey]:
        return self.verification_keys.get(signer)

    def attributes(self) -> List[str]:
        return sorted(self.decryption_keys)


def encode_keyring(provider: BilinearProvider, ring: Keyring) -> bytes:
    out = bytearray(_text(ring.gid))
    out += _integer(ring.prime or 0)
    out += struct.pack(">I", len(ring.verification_keys))
    for signer in sorted(ring.verification_keys):
        out += _blob(encode_verification_key(provider, ring.verification_keys[signer]))
    out += struct.pack(">I", len(ring.decryption_keys))
    for attr in sorted(ring.decryption_keys):
        out += _blob(encode_decryption_key(provider, ring.decryption_keys[attr]))
    return bytes(out)


def decode_keyring(provider: BilinearProvider, data: bytes) -> Keyring:
    reader = _Reader(data)
    ring = Keyring(reader.text())
    ring.prime = reader.integer() or None
    for _ in range(reader.u32()):
        ring.add(decode_verification_key(provider, reader.blob()))
    for _ in range(reader.u32()):
        ring.add(decode_decryption_key(provider, reader.blob()))
    reader.done()
    return ring


# -- key files -------------------------------------------------------------------


def dump_key_file(kind: KeyKind, data: bytes) -> str:
    return KeyEnvelope.wrap(kind, data).to_json()


def load_key_file(text: str, kind: KeyKind) -> bytes:
    return KeyEnvelope.from_json(text).payload(kind)
