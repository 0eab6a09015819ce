"""DCC-side state and the Revoke algorithm.

The registry maps each gid to its secret prime q_i; the access-list table
maps each attribute to the gids still entitled to it. ``revoke`` re-blinds
every attribute row's C2 under a fresh group key and publishes the CRT
solution that only current members can open.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Union

from sympy import isprime

from .config import SETTINGS
from .crt import crt_solve, has_mask_shape, mask, mask_width
from .errors import EncodingError, RegistryError
from .pairing import BilinearProvider
from .randomness import Rng, make_rng
from .scheme import CiphertextRow, RevokedText, SigncryptedText

logger = logging.getLogger(__name__)

# Exhaustive search below this many candidates, random probing above.
_ENUMERATE_LIMIT = 1 << 16
_MAX_PROBES = 200_000

PathLike = Union[str, Path]


class PrimeRegistry:
    """gid -> q_i with every q_i prime, distinct, above p, low ``mask_width`` bits set."""

    def __init__(
        self,
        mask_width: int,
        extra_bits: Optional[int] = None,
        primes: Optional[Mapping[str, int]] = None,
    ):
        if mask_width < 2:
            raise RegistryError("mask width must be at least 2 bits")
        self.mask_width = mask_width
        self.extra_bits = SETTINGS.prime_extra_bits if extra_bits is None else extra_bits
        if self.extra_bits < 2:
            raise RegistryError("primes need at least 2 bits above the mask")
        self._lock = threading.RLock()
        self._primes: Dict[str, int] = {}
        for gid, q in (primes or {}).items():
            self.record(gid, q)

    @classmethod
    def for_order(cls, order: int, extra_bits: Optional[int] = None) -> "PrimeRegistry":
        return cls(mask_width(order), extra_bits)

    def __contains__(self, gid: object) -> bool:
        with self._lock:
            return gid in self._primes

    def __len__(self) -> int:
        with self._lock:
            return len(self._primes)

    def gids(self) -> List[str]:
        with self._lock:
            return sorted(self._primes)

    def get(self, gid: str) -> int:
        with self._lock:
            try:
                return self._primes[gid]
            except KeyError:
                raise RegistryError(f"gid {gid!r} has no registered prime")

    def snapshot(self) -> Dict[str, int]:
        with self._lock:
            return dict(self._primes)

    def record(self, gid: str, q: int) -> int:
        """Store an externally chosen prime after checking its shape."""
        if not gid:
            raise RegistryError("gid must be non-empty")
        if not has_mask_shape(q, self.mask_width) or q.bit_length() < self.mask_width + 2:
            raise RegistryError(f"prime for {gid!r} does not have the required low-bit mask shape")
        if not isprime(q):
            raise RegistryError(f"value recorded for {gid!r} is not prime")
        with self._lock:
            if gid in self._primes:
                raise RegistryError(f"gid {gid!r} already has a prime")
            if q in self._primes.values():
                raise RegistryError(f"prime for {gid!r} is already assigned")
            self._primes[gid] = q
        return q

    def _candidate(self, k: int) -> int:
        return (k << self.mask_width) | ((1 << self.mask_width) - 1)

    def _generate(self, rng: Rng, used: Set[int]) -> int:
        low, high = 1 << (self.extra_bits - 1), 1 << self.extra_bits
        if high - low <= _ENUMERATE_LIMIT:
            free = [
                q for q in (self._candidate(k) for k in range(low, high))
                if q not in used and isprime(q)
            ]
            if not free:
                raise RegistryError("no unused prime of the required shape is left")
            return free[rng.randrange(len(free))]
        for _ in range(_MAX_PROBES):
            q = self._candidate(rng.randrange(low, high))
            if q not in used and isprime(q):
                return q
        raise RegistryError("failed to find a prime of the required shape")  # pragma: no cover

    def assign(self, gid: str, rng: Optional[Rng] = None) -> int:
        if not gid:
            raise RegistryError("gid must be non-empty")
        rng = rng if rng is not None else make_rng()
        with self._lock:
            if gid in self._primes:
                raise RegistryError(f"gid {gid!r} already has a prime")
            q = self._generate(rng, set(self._primes.values()))
            self._primes[gid] = q
        logger.info(f"Assigned prime to {gid}", extra={"gid": gid, "prime_bits": q.bit_length()})
        return q

    def to_document(self) -> Dict[str, str]:
        return {gid: format(q, "x") for gid, q in sorted(self.snapshot().items())}

    @classmethod
    def from_document(
        cls, doc: Mapping[str, str], mask_width: int, extra_bits: Optional[int] = None
    ) -> "PrimeRegistry":
        try:
            primes = {gid: int(value, 16) for gid, value in doc.items()}
        except (TypeError, ValueError) as exc:
            raise EncodingError(f"invalid registry document: {exc}")
        # Stored primes may predate a change of extra_bits; only the mask is binding.
        registry = cls(mask_width, extra_bits)
        for gid, q in primes.items():
            registry.record(gid, q)
        return registry


def assign_prime(registry: PrimeRegistry, gid: str, rng: Optional[Rng] = None) -> int:
    return registry.assign(gid, rng)


class AccessListTable:
    """attribute -> G_x; every member must exist in the registry."""

    def __init__(
        self, registry: PrimeRegistry, lists: Optional[Mapping[str, Iterable[str]]] = None
    ):
        self.registry = registry
        self._lock = threading.RLock()
        self._lists: Dict[str, Set[str]] = {}
        for attr, members in (lists or {}).items():
            self.ensure(attr)
            for gid in members:
                self.add(attr, gid)

    def ensure(self, attr: str) -> None:
        with self._lock:
            self._lists.setdefault(attr, set())

    def add(self, attr: str, gid: str) -> None:
        if gid not in self.registry:
            raise RegistryError(f"gid {gid!r} is not registered")
        with self._lock:
            self._lists.setdefault(attr, set()).add(gid)

    def remove(self, attr: str, gid: str) -> bool:
        """Drop gid from G_x; False when it was not a member."""
        with self._lock:
            members = self._lists.get(attr)
            if not members or gid not in members:
                return False
            members.discard(gid)
            return True

    def members(self, attr: str) -> FrozenSet[str]:
        with self._lock:
            return frozenset(self._lists.get(attr, ()))

    def attributes(self) -> List[str]:
        with self._lock:
            return sorted(self._lists)

    def attributes_of(self, gid: str) -> List[str]:
        with self._lock:
            return sorted(a for a, members in self._lists.items() if gid in members)

    def snapshot(self) -> Dict[str, FrozenSet[str]]:
        with self._lock:
            return {attr: frozenset(members) for attr, members in self._lists.items()}

    def to_document(self) -> Dict[str, List[str]]:
        return {attr: sorted(members) for attr, members in sorted(self.snapshot().items())}

    @classmethod
    def from_document(
        cls, doc: Mapping[str, Iterable[str]], registry: PrimeRegistry
    ) -> "AccessListTable":
        return cls(registry, doc)


def revoke(
    provider: BilinearProvider,
    text: SigncryptedText,
    registry: PrimeRegistry,
    table: AccessListTable,
    rng: Optional[Rng] = None,
) -> RevokedText:
    """C2' = C2^beta_x and B_x = CRT(beta_x XOR q_i) per attribute row.

    The signer row passes through unchanged. An empty access list yields
    ``B_x = 0`` and a fresh beta_x nobody can recover.
    """
    return _revoke_snapshot(provider, text, table.snapshot(), registry.snapshot(), rng)


def _revoke_snapshot(
    provider: BilinearProvider,
    text: SigncryptedText,
    lists: Mapping[str, FrozenSet[str]],
    primes: Mapping[str, int],
    rng: Optional[Rng],
) -> RevokedText:
    if isinstance(text, RevokedText):
        raise ValueError("text has already been revoked")
    rng = rng if rng is not None else make_rng()
    rows: List[CiphertextRow] = []
    solutions: List[Optional[int]] = []
    members_total = 0
    for x, row in enumerate(text.rows):
        if x == text.signer_row:
            rows.append(row)
            solutions.append(None)
            continue
        members = sorted(lists.get(text.policy.delta[x], frozenset()))
        missing = [gid for gid in members if gid not in primes]
        if missing:
            raise RegistryError(f"access list members without a prime: {missing}")
        beta = provider.random_scalar(rng, nonzero=True)
        residues = [(mask(beta, primes[gid]), primes[gid]) for gid in members]
        solutions.append(crt_solve(residues, check_coprime=False))
        rows.append(CiphertextRow(row.c1, row.c2 ** beta, row.c3, row.c4))
        members_total += len(members)
    logger.info(
        f"Revocation applied to {len(rows) - 1} attribute rows",
        extra={"rows": len(rows), "members": members_total},
    )
    return RevokedText.from_signcrypted(text, rows, solutions)


class DataCommunicationCompany:
    """Registry, access lists and the Revoke step behind one lock.

    Writes are exclusive; ``revoke`` works on a snapshot taken under the lock.
    """

    REGISTRY_FILE = "registry.json"
    ACCESS_LISTS_FILE = "access_lists.json"

    def __init__(
        self,
        provider: BilinearProvider,
        registry: Optional[PrimeRegistry] = None,
        table: Optional[AccessListTable] = None,
        extra_bits: Optional[int] = None,
    ):
        self.provider = provider
        if registry is None:
            registry = PrimeRegistry.for_order(provider.order, extra_bits)
        self.registry = registry
        self.table = table if table is not None else AccessListTable(self.registry)
        self._lock = threading.RLock()

    def register(self, gid: str, rng: Optional[Rng] = None) -> int:
        with self._lock:
            return self.registry.assign(gid, rng)

    def grant(self, attr: str, gid: str) -> None:
        with self._lock:
            self.table.add(attr, gid)
        logger.info(f"Granted {attr}", extra={"gid": gid, "attribute": attr})

    def revoke_member(self, attr: str, gid: str) -> bool:
        with self._lock:
            removed = self.table.remove(attr, gid)
        if removed:
            logger.info(f"Revoked {attr}", extra={"gid": gid, "attribute": attr})
        return removed

    def revoke(self, text: SigncryptedText, rng: Optional[Rng] = None) -> RevokedText:
        with self._lock:
            lists, primes = self.table.snapshot(), self.registry.snapshot()
        return _revoke_snapshot(self.provider, text, lists, primes, rng)

    def save(self, directory: PathLike) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with self._lock:
            registry_doc = self.registry.to_document()
            lists_doc = self.table.to_document()
        (directory / self.REGISTRY_FILE).write_text(json.dumps(registry_doc, indent=2) + "\n")
        (directory / self.ACCESS_LISTS_FILE).write_text(json.dumps(lists_doc, indent=2) + "\n")

    @classmethod
    def load(
        cls, directory: PathLike, provider: BilinearProvider, extra_bits: Optional[int] = None
    ) -> "DataCommunicationCompany":
        directory = Path(directory)
        registry = load_registry(directory / cls.REGISTRY_FILE, provider.order, extra_bits)
        table = load_access_lists(directory / cls.ACCESS_LISTS_FILE, registry)
        return cls(provider, registry, table)


def load_registry(path: PathLike, order: int, extra_bits: Optional[int] = None) -> PrimeRegistry:
    path = Path(path)
    if not path.exists():
        return PrimeRegistry.for_order(order, extra_bits)
    return PrimeRegistry.from_document(_read_json(path), mask_width(order), extra_bits)


def load_access_lists(path: PathLike, registry: PrimeRegistry) -> AccessListTable:
    path = Path(path)
    if not path.exists():
        return AccessListTable(registry)
    return AccessListTable.from_document(_read_json(path), registry)


def _read_json(path: Path):
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise EncodingError(f"{path} is not valid JSON: {exc}")
