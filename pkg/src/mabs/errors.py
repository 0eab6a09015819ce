"""Exception hierarchy shared by every mabs module."""

from __future__ import annotations

from typing import Optional


class MabsError(Exception):
    """Base class for all library errors."""


class ConfigurationError(MabsError):
    """Universes or the controller map T are inconsistent."""


class UnknownControllerError(ConfigurationError):
    """An authority or signer label is not part of the universe."""


class PolicySyntaxError(MabsError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class PolicyShapeError(MabsError):
    """Policy is not `signer identity attribute AND formula over U_1`."""


class DimensionError(MabsError, ValueError):
    pass


class KeyMismatchError(MabsError):
    """A key was presented to the wrong authority, signer or identity."""


class MissingAuthorityKeyError(MabsError):
    pass


class RandomnessExhausted(MabsError):
    pass


class RegistryError(MabsError):
    pass


class CRTError(MabsError, ValueError):
    pass


class EncodingError(MabsError, ValueError):
    pass


class ProviderUnavailable(MabsError):
    pass


class DesigncryptionError(MabsError):
    """Designcryption failed; `outcome` is the label reported to operators."""

    outcome = "FAILED"

    def __init__(self, message: Optional[str] = None):
        super().__init__(message or self.outcome)


class Unsatisfied(DesigncryptionError):
    outcome = "UNSATISFIED"


class AuthenticationFailure(DesigncryptionError):
    """AEAD rejected the payload, or every satisfying row was revoked.

    Forgery, collusion residue, revocation and corruption are
    indistinguishable to the receiver and all land here.
    """

    outcome = "AUTH_FAIL"


class ScenarioError(ConfigurationError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
