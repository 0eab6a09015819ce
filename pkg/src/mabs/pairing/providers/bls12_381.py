"""BLS12-381 provider backed by py_ecc.

Source1 = G1, Source2 = G2, Target = the order-r subgroup of F_p^12.
Points use the ZCash compressed encodings; target elements are the twelve
F_p coefficients, 48 bytes each, big-endian.
"""

from __future__ import annotations

import hashlib
from typing import Any, Optional

from ...errors import EncodingError, ProviderUnavailable
from ..group import BilinearProvider, Role

try:
    from py_ecc.bls.hash_to_curve import hash_to_G1
    from py_ecc.bls.point_compression import (
        compress_G1,
        compress_G2,
        decompress_G1,
        decompress_G2,
    )
    from py_ecc.optimized_bls12_381 import (
        FQ12,
        G1,
        G2,
        Z1,
        Z2,
        add,
        curve_order,
        eq,
        field_modulus,
        is_inf,
        multiply,
        neg,
        pairing,
    )
except ImportError as exc:  # pragma: no cover - exercised only without py_ecc
    _IMPORT_ERROR: Optional[ImportError] = exc
else:
    _IMPORT_ERROR = None

DST_PREFIX = b"MABS-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_"
FQ_BYTES = 48
GT_COEFFS = 12


class BLS12381Provider(BilinearProvider):
    name = "production"

    def __init__(self):
        if _IMPORT_ERROR is not None:
            raise ProviderUnavailable(
                f"py_ecc is required for the production provider: {_IMPORT_ERROR}"
            )
        self.order = curve_order
        self._gt_generator = None

    @property
    def security_bits(self) -> int:
        return 128

    # -- internals -----------------------------------------------------------

    def _generator(self, role: Role) -> Any:
        if role == Role.SOURCE1:
            return G1
        if role == Role.SOURCE2:
            return G2
        if self._gt_generator is None:
            self._gt_generator = pairing(G2, G1)
        return self._gt_generator

    def _identity(self, role: Role) -> Any:
        if role == Role.SOURCE1:
            return Z1
        if role == Role.SOURCE2:
            return Z2
        return FQ12.one()

    def _op(self, role: Role, a: Any, b: Any) -> Any:
        if role == Role.TARGET:
            return a * b
        return add(a, b)

    def _inv(self, role: Role, a: Any) -> Any:
        if role == Role.TARGET:
            return a.inv()
        return neg(a)

    def _exp(self, role: Role, a: Any, k: int) -> Any:
        if role == Role.TARGET:
            return a ** k
        return multiply(a, k)

    def _eq(self, role: Role, a: Any, b: Any) -> bool:
        if role == Role.TARGET:
            return self._gt_coeffs(a) == self._gt_coeffs(b)
        return eq(a, b)

    def _hash(self, domain: bytes, data: bytes) -> Any:
        return hash_to_G1(data, DST_PREFIX + domain + b"_", hashlib.sha256)

    def _pair(self, a: Any, b: Any) -> Any:
        # py_ecc takes (G2, G1)
        return pairing(b, a)

    @staticmethod
    def _gt_coeffs(value: Any) -> tuple:
        return tuple(int(c) % field_modulus for c in value.coeffs)

    def _encode(self, role: Role, value: Any) -> bytes:
        if role == Role.SOURCE1:
            return int(compress_G1(value)).to_bytes(FQ_BYTES, "big")
        if role == Role.SOURCE2:
            z1, z2 = compress_G2(value)
            return int(z1).to_bytes(FQ_BYTES, "big") + int(z2).to_bytes(FQ_BYTES, "big")
        return b"".join(c.to_bytes(FQ_BYTES, "big") for c in self._gt_coeffs(value))

    def _decode(self, role: Role, data: bytes) -> Any:
        try:
            if role == Role.SOURCE1:
                if len(data) != FQ_BYTES:
                    raise EncodingError(f"G1 encoding must be {FQ_BYTES} bytes")
                point = decompress_G1(int.from_bytes(data, "big"))
            elif role == Role.SOURCE2:
                if len(data) != 2 * FQ_BYTES:
                    raise EncodingError(f"G2 encoding must be {2 * FQ_BYTES} bytes")
                point = decompress_G2(
                    (int.from_bytes(data[:FQ_BYTES], "big"), int.from_bytes(data[FQ_BYTES:], "big"))
                )
            else:
                return self._decode_target(data)
        except EncodingError:
            raise
        except (ValueError, AssertionError, TypeError) as exc:
            raise EncodingError(f"invalid {role.name} encoding: {exc}")
        if not is_inf(multiply(point, curve_order)):
            raise EncodingError(f"{role.name} point outside the prime-order subgroup")
        return point

    def _decode_target(self, data: bytes) -> Any:
        if len(data) != GT_COEFFS * FQ_BYTES:
            raise EncodingError(f"GT encoding must be {GT_COEFFS * FQ_BYTES} bytes")
        coeffs = [
            int.from_bytes(data[i * FQ_BYTES:(i + 1) * FQ_BYTES], "big") for i in range(GT_COEFFS)
        ]
        if any(c >= field_modulus for c in coeffs):
            raise EncodingError("GT coefficient not reduced")
        value = FQ12(coeffs)
        if self._gt_coeffs(value ** curve_order) != self._gt_coeffs(FQ12.one()):
            raise EncodingError("GT element outside the order-r subgroup")
        return value
