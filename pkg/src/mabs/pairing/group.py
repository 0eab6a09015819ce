"""Provider contract for the asymmetric bilinear group all scheme algebra runs on.

Group placement used throughout the package:

* Source1: decryption/verification key ``K``, ``H(GID)``, ``F(u)``, ``C4``.
* Source2: ``K'``, ``C2``, ``C3``, authority ``g^y``.
* Target:  ``e(g,g)^alpha``, ``C``, ``C1``.

A symmetric pairing is the degenerate case Source1 == Source2.
"""

from __future__ import annotations

import struct
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Dict, Union

from ..errors import EncodingError
from ..randomness import Rng


class Role(IntEnum):
    SOURCE1 = 0x01
    SOURCE2 = 0x02
    TARGET = 0x03


def _label_bytes(label: Union[str, bytes]) -> bytes:
    if isinstance(label, str):
        label = label.encode("utf-8")
    if not label:
        raise ValueError("label must be non-empty")
    return label


class GroupElement:
    """An element of one of the three groups, written multiplicatively."""

    __slots__ = ("provider", "role", "value")

    def __init__(self, provider: "BilinearProvider", role: Role, value: Any):
        self.provider = provider
        self.role = role
        self.value = value

    def _check(self, other: "GroupElement") -> None:
        if not isinstance(other, GroupElement):
            raise TypeError(f"expected GroupElement, got {type(other).__name__}")
        if other.provider is not self.provider or other.role != self.role:
            raise TypeError(f"cannot combine {self.role.name} with {other.role.name}")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        value = self.provider._op(self.role, self.value, other.value)
        return GroupElement(self.provider, self.role, value)

    def __invert__(self) -> "GroupElement":
        return GroupElement(self.provider, self.role, self.provider._inv(self.role, self.value))

    def __truediv__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return self * ~other

    def __pow__(self, exponent: int) -> "GroupElement":
        k = int(exponent) % self.provider.order
        return GroupElement(self.provider, self.role, self.provider._exp(self.role, self.value, k))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return (
            other.provider is self.provider
            and other.role == self.role
            and self.provider._eq(self.role, self.value, other.value)
        )

    def __hash__(self) -> int:
        return hash((self.role, self.to_bytes()))

    def is_identity(self) -> bool:
        return self == self.provider.identity(self.role)

    def to_bytes(self) -> bytes:
        return self.provider._encode(self.role, self.value)

    def __repr__(self) -> str:
        return f"GroupElement({self.role.name}, {self.to_bytes().hex()[:16]}…)"


@dataclass(frozen=True)
class BilinearParams:
    group_order: int
    generator_g1: GroupElement
    generator_g2: GroupElement
    pairing_of_generators: GroupElement


class BilinearProvider(ABC):
    """Abstract bilinear group facility.

    Providers are immutable after construction; every operation is pure and
    may be called from any number of threads.
    """

    name: str = "abstract"
    order: int
    #: True when elements expose their discrete logarithm (test oracle).
    transparent: bool = False

    # -- construction helpers ------------------------------------------------

    def g1(self) -> GroupElement:
        return GroupElement(self, Role.SOURCE1, self._generator(Role.SOURCE1))

    def g2(self) -> GroupElement:
        return GroupElement(self, Role.SOURCE2, self._generator(Role.SOURCE2))

    def gt(self) -> GroupElement:
        return GroupElement(self, Role.TARGET, self._generator(Role.TARGET))

    def identity(self, role: Role) -> GroupElement:
        return GroupElement(self, role, self._identity(role))

    @property
    def params(self) -> BilinearParams:
        return BilinearParams(self.order, self.g1(), self.g2(), self.gt())

    @property
    def security_bits(self) -> int:
        return self.order.bit_length() // 2

    def descriptor(self) -> Dict[str, Any]:
        """JSON-able description sufficient to rebuild the provider."""
        return {"name": self.name}

    # -- scheme-facing operations ----------------------------------------------

    def hash_to_identity_group(self, gid: Union[str, bytes]) -> GroupElement:
        """H: GID -> Source1."""
        return GroupElement(self, Role.SOURCE1, self._hash(b"H", _label_bytes(gid)))

    def hash_to_attribute_group(self, attr: Union[str, bytes]) -> GroupElement:
        """F: U -> Source1, domain-separated from H."""
        return GroupElement(self, Role.SOURCE1, self._hash(b"F", _label_bytes(attr)))

    def pair(self, x: GroupElement, y: GroupElement) -> GroupElement:
        if x.provider is not self or y.provider is not self:
            raise TypeError("elements belong to another provider")
        if x.role != Role.SOURCE1 or y.role != Role.SOURCE2:
            raise TypeError(f"pair expects (SOURCE1, SOURCE2), got ({x.role.name}, {y.role.name})")
        return GroupElement(self, Role.TARGET, self._pair(x.value, y.value))

    def random_scalar(self, rng: Rng, nonzero: bool = False) -> int:
        return rng.randrange(1 if nonzero else 0, self.order)

    @property
    def scalar_width(self) -> int:
        return (self.order.bit_length() + 7) // 8

    # -- wire format: role tag | u32 length | canonical bytes -----------------

    def serialize(self, element: GroupElement) -> bytes:
        if element.provider is not self:
            raise TypeError("element belongs to another provider")
        body = element.to_bytes()
        return struct.pack(">BI", int(element.role), len(body)) + body

    def deserialize(self, data: bytes) -> GroupElement:
        element, used = self.deserialize_prefix(data)
        if used != len(data):
            raise EncodingError(f"{len(data) - used} trailing bytes after element")
        return element

    def deserialize_prefix(self, data: bytes, offset: int = 0) -> "tuple[GroupElement, int]":
        """Decode one element starting at ``offset``; return it and the next offset."""
        if len(data) - offset < 5:
            raise EncodingError("truncated element header")
        tag, length = struct.unpack_from(">BI", data, offset)
        try:
            role = Role(tag)
        except ValueError:
            raise EncodingError(f"unknown role tag 0x{tag:02x}")
        start = offset + 5
        end = start + length
        if end > len(data):
            raise EncodingError("truncated element body")
        value = self._decode(role, bytes(data[start:end]))
        return GroupElement(self, role, value), end

    # -- provider internals ------------------------------------------------------

    @abstractmethod
    def _generator(self, role: Role) -> Any: ...

    @abstractmethod
    def _identity(self, role: Role) -> Any: ...

    @abstractmethod
    def _op(self, role: Role, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def _inv(self, role: Role, a: Any) -> Any: ...

    @abstractmethod
    def _exp(self, role: Role, a: Any, k: int) -> Any: ...

    @abstractmethod
    def _eq(self, role: Role, a: Any, b: Any) -> bool: ...

    @abstractmethod
    def _hash(self, domain: bytes, data: bytes) -> Any: ...

    @abstractmethod
    def _pair(self, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def _encode(self, role: Role, value: Any) -> bytes: ...

    @abstractmethod
    def _decode(self, role: Role, data: bytes) -> Any:
        """Parse canonical bytes; raise EncodingError on anything malformed."""
