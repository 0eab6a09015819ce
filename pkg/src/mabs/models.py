from __future__ import annotations

import json
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from .errors import EncodingError

_STRICT = {"extra": "forbid", "validate_assignment": True}


class KeyKind(str, Enum):
    AUTHORITY_PUBLIC = "authority-public"
    AUTHORITY_SECRET = "authority-secret"
    SIGNER_KEY = "signer-key"
    DECRYPTION_KEY = "decryption-key"
    VERIFICATION_KEY = "verification-key"
    KEYRING = "keyring"


class KeyEnvelope(BaseModel):
    """On-disk key file: a type tag plus the binary wire encoding in hex."""

    type: KeyKind
    data: str = Field(description="Hex-encoded wire bytes", pattern=r"^[0-9a-f]*$")

    model_config = _STRICT

    @classmethod
    def wrap(cls, kind: KeyKind, data: bytes) -> "KeyEnvelope":
        return cls(type=kind, data=data.hex())

    def payload(self, expected: KeyKind) -> bytes:
        if self.type != expected:
            raise EncodingError(f"expected a {expected.value} file, got {self.type.value}")
        return bytes.fromhex(self.data)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "KeyEnvelope":
        try:
            return cls.model_validate_json(text)
        except ValueError as exc:
            raise EncodingError(f"invalid key file: {exc}")


class GlobalParamsDocument(BaseModel):
    """Canonical JSON form of the public system parameters."""

    version: int = Field(default=1, ge=1, le=1)
    provider: Dict[str, Any]
    security_parameter: int = Field(ge=1)
    attributes: List[str] = Field(description="U_1, sorted")
    identity_attributes: List[str] = Field(description="U_2, sorted")
    authorities: List[str]
    signers: List[str]
    controller_map: Dict[str, str] = Field(description="T: attribute -> controller")
    identities: List[str] = Field(default_factory=list)
    generators: Dict[str, str] = Field(default_factory=dict, description="Hex wire encodings")

    model_config = _STRICT

    @field_validator("provider")
    @classmethod
    def validate_provider(cls, v):
        if "name" not in v:
            raise ValueError("provider descriptor needs a name")
        return v

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, indent=2) + "\n"


class Outcome(str, Enum):
    DELIVERED = "DELIVERED"
    UNSATISFIED = "UNSATISFIED"
    AUTH_FAIL = "AUTH_FAIL"


class Hop(BaseModel):
    name: str
    latency_ms: int = Field(ge=0)

    model_config = _STRICT


class DownlinkEvent(BaseModel):
    seq: int = Field(ge=0)
    sender: str
    policy: str
    payload_sha256: str = Field(pattern=r"^[0-9a-f]{64}$")
    sent_at_ms: int = Field(ge=0)
    delivered_at_ms: int = Field(ge=0)
    hops: List[Hop]
    outcomes: Dict[str, Outcome] = Field(description="Per-meter outcome, keyed by gid")
    expected: Dict[str, Outcome] = Field(description="Boolean-evaluation oracle")
    oracle_agrees: bool

    model_config = _STRICT

    def delivered(self) -> List[str]:
        return [gid for gid, o in self.outcomes.items() if o == Outcome.DELIVERED]


class BenchRow(BaseModel):
    suite: str
    param: int
    mean_ms: float = Field(ge=0)
    std_ms: float = Field(ge=0)
    n: int = Field(ge=1)

    model_config = _STRICT


class BenchSummary(BaseModel):
    suite: str
    points: int
    slope_ms: Optional[float] = None
    intercept_ms: Optional[float] = None
    r_squared: Optional[float] = None
    monotonic: bool

    model_config = _STRICT


class HealthResponse(BaseModel):
    status: str
    service: str
    version: str
    users: int
    attributes: int


class AccessListsResponse(BaseModel):
    lists: Dict[str, List[str]]


class MembershipResponse(BaseModel):
    attribute: str
    gid: str
    members: List[str]
