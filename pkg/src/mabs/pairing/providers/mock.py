"""Transparent provider: every element is its own discrete logarithm.

Source1, Source2 and Target are all Z_p under addition; the pairing
multiplies exponents. Correctness of the scheme reduces to exponent
identities, which this provider lets tests check exactly.
"""

from __future__ import annotations

import hashlib
import hmac
from typing import Any, Dict

from sympy import isprime

from ...errors import EncodingError
from ..group import BilinearProvider, GroupElement, Role


def prf(seed: int, domain: bytes, data: bytes, order: int) -> int:
    """HMAC-SHA256(seed, domain | "|" | data) reduced mod ``order``."""
    key = seed.to_bytes(8, "big")
    digest = hmac.new(key, domain + b"|" + data, hashlib.sha256).digest()
    return int.from_bytes(digest, "big") % order


class MockProvider(BilinearProvider):
    name = "mock"
    transparent = True

    def __init__(self, seed: int = 0, order: int = 1009):
        if order < 11 or not isprime(order):
            raise ValueError(f"mock group order must be a prime >= 11, got {order}")
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed
        self.order = order

    def descriptor(self) -> Dict[str, Any]:
        return {"name": self.name, "seed": self.seed, "order": self.order}

    def element(self, role: Role, exponent: int) -> GroupElement:
        """Build the element g_role^exponent directly."""
        return GroupElement(self, role, exponent % self.order)

    def log(self, element: GroupElement) -> int:
        if element.provider is not self:
            raise TypeError("element belongs to another provider")
        return element.value

    def _generator(self, role: Role) -> Any:
        return 1

    def _identity(self, role: Role) -> Any:
        return 0

    def _op(self, role: Role, a: Any, b: Any) -> Any:
        return (a + b) % self.order

    def _inv(self, role: Role, a: Any) -> Any:
        return (-a) % self.order

    def _exp(self, role: Role, a: Any, k: int) -> Any:
        return (a * k) % self.order

    def _eq(self, role: Role, a: Any, b: Any) -> bool:
        return a == b

    def _hash(self, domain: bytes, data: bytes) -> Any:
        return prf(self.seed, domain, data, self.order)

    def _pair(self, a: Any, b: Any) -> Any:
        return (a * b) % self.order

    def _encode(self, role: Role, value: Any) -> bytes:
        return value.to_bytes(self.scalar_width, "big")

    def _decode(self, role: Role, data: bytes) -> Any:
        if len(data) != self.scalar_width:
            raise EncodingError(f"mock element must be {self.scalar_width} bytes, got {len(data)}")
        value = int.from_bytes(data, "big")
        if value >= self.order:
            raise EncodingError("mock element exponent out of range")
        return value
