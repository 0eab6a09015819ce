from __future__ import annotations

import hashlib
import hmac
from typing import Optional


class RelayAuth:
    """HMAC-SHA256 shared with the DNOs and vendors allowed to use the relay.

    The signed message binds the method and path to the body, so a signature
    for one membership change cannot be replayed against another.
    """

    @staticmethod
    def message(method: str, path: str, body: bytes = b"") -> bytes:
        return method.upper().encode("ascii") + b" " + path.encode("utf-8") + b"\n" + body

    @staticmethod
    def sign(message: bytes, secret: str, prefix: str = "sha256=") -> str:
        digest = hmac.new(secret.encode("utf-8"), message, hashlib.sha256).hexdigest()
        return f"{prefix}{digest}"

    @staticmethod
    def verify_hmac(
        message: bytes, signature: Optional[str], secret: Optional[str], prefix: str = "sha256="
    ) -> bool:
        if not secret:
            return True
        if not signature:
            return False
        if prefix and not signature.startswith(prefix):
            return False
        provided = signature[len(prefix) :]
        digest = hmac.new(secret.encode("utf-8"), message, hashlib.sha256).hexdigest()
        return hmac.compare_digest(provided, digest)
