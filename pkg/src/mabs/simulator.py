"""In-process downlink simulation: senders signcrypt, the DCC revokes, meters designcrypt.

DNOs and vendors are each an attribute authority for their own attributes
and a signer with identity attribute ``<name>.<identity_attribute_name>``.
The WAN/NAN/BAN gateways carry no cryptography and appear only as per-hop
latency annotations on every event.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set

from .config import SETTINGS, Settings
from .errors import (
    AuthenticationFailure,
    ConfigurationError,
    RegistryError,
    Unsatisfied,
)
from .models import DownlinkEvent, Hop, Outcome
from .pairing import BilinearProvider, get_provider
from .policy import PolicyFormula, parse_policy
from .randomness import make_rng
from .revocation import DataCommunicationCompany
from .scheme import (
    AuthorityKeypair,
    GlobalParams,
    SignerKey,
    authority_setup,
    dec_key_gen,
    designcrypt,
    setup_from_controllers,
    sign_key_gen,
    signcrypt,
    ver_key_gen,
)
from .wire import Keyring

logger = logging.getLogger(__name__)

DNO = "DNO"
VENDOR = "VENDOR"


@dataclass
class Actor:
    name: str
    kind: str
    attributes: List[str]
    keypair: Optional[AuthorityKeypair] = None
    signer_key: Optional[SignerKey] = None


@dataclass
class UserRecord:
    gid: str
    keyring: Keyring
    history: List[str] = field(default_factory=list)

    def held_attributes(self) -> Set[str]:
        held = set(self.keyring.decryption_keys)
        held.update(vk.attribute for vk in self.keyring.verification_keys.values())
        return held


class GridSimulator:
    """Single-threaded, seeded model of one DCC serving many smart meters."""

    def __init__(
        self,
        provider: Optional[BilinearProvider] = None,
        seed: Optional[int] = 0,
        settings: Optional[Settings] = None,
    ):
        self.settings = settings or SETTINGS
        self.provider = provider or get_provider(self.settings.provider)
        self.rng = make_rng(seed)
        self.actors: Dict[str, Actor] = {}
        self.gp: Optional[GlobalParams] = None
        self.dcc: Optional[DataCommunicationCompany] = None
        self.users: Dict[str, UserRecord] = {}
        self.events: List[DownlinkEvent] = []
        self.clock_ms = 0

    # -- actors --------------------------------------------------------------

    def declare_actor(self, kind: str, name: str, attributes: Iterable[str]) -> Actor:
        if self.gp is not None:
            raise ConfigurationError("actors must be declared before any other command")
        if kind not in (DNO, VENDOR):
            raise ConfigurationError(f"unknown actor kind {kind!r}")
        if name in self.actors:
            raise ConfigurationError(f"actor {name!r} declared twice")
        qualified = [a if "." in a else f"{name}.{a}" for a in attributes]
        actor = Actor(name, kind, qualified)
        self.actors[name] = actor
        return actor

    def declare_dno(self, name: str, attributes: Iterable[str]) -> Actor:
        return self.declare_actor(DNO, name, attributes)

    def declare_vendor(self, name: str, attributes: Iterable[str]) -> Actor:
        return self.declare_actor(VENDOR, name, attributes)

    def identity_attribute(self, name: str) -> str:
        return f"{name}.{self.settings.identity_attribute_name}"

    def _ensure_setup(self) -> GlobalParams:
        if self.gp is not None:
            return self.gp
        if not self.actors:
            raise ConfigurationError("no DNO or vendor declared")
        names = sorted(self.actors)
        self.gp = setup_from_controllers(
            self.provider,
            {name: self.actors[name].attributes for name in names},
            {name: self.identity_attribute(name) for name in names},
        )
        for name in names:
            actor = self.actors[name]
            actor.keypair = authority_setup(self.gp, name, self.rng)
            actor.signer_key = sign_key_gen(self.gp, name, self.rng)
        self.dcc = DataCommunicationCompany(self.provider)
        for attr in sorted(self.gp.attributes):
            self.dcc.table.ensure(attr)
        logger.info(
            f"Simulator ready with {len(names)} actors",
            extra={"dnos": sum(a.kind == DNO for a in self.actors.values())},
        )
        return self.gp

    # -- users ---------------------------------------------------------------

    def _user(self, gid: str) -> UserRecord:
        try:
            return self.users[gid]
        except KeyError:
            raise RegistryError(f"meter {gid!r} is not registered")

    def register_user(self, gid: str) -> UserRecord:
        """Assign q_i and issue a verification key from every signer."""
        gp = self._ensure_setup()
        if gid in self.users:
            raise RegistryError(f"meter {gid!r} is already registered")
        prime = self.dcc.register(gid, self.rng)
        ring = Keyring(gid, prime)
        for name in sorted(self.actors):
            ring.add(ver_key_gen(gp, gid, name, self.actors[name].signer_key, self.rng))
        user = UserRecord(gid, ring)
        self.users[gid] = user
        return user

    def grant_attribute(self, gid: str, attr: str) -> None:
        gp = self._ensure_setup()
        user = self._user(gid)
        authority = self.actors[gp.controller(attr)]
        user.keyring.add(dec_key_gen(gp, gid, attr, authority.keypair.secret, self.rng))
        self.dcc.grant(attr, gid)
        user.history.append(f"+{attr}")

    def revoke_attribute(self, gid: str, attr: str) -> None:
        """Remove gid from G_x; the meter keeps its now useless decryption key."""
        self._ensure_setup()
        user = self._user(gid)
        if not self.dcc.revoke_member(attr, gid):
            raise RegistryError(f"meter {gid!r} is not on the access list of {attr!r}")
        user.history.append(f"-{attr}")

    def valid_attributes(self, gid: str) -> Set[str]:
        user = self._user(gid)
        valid = set(self.dcc.table.attributes_of(gid))
        valid.update(vk.attribute for vk in user.keyring.verification_keys.values())
        return valid

    def expected_outcome(self, formula: PolicyFormula, gid: str) -> Outcome:
        """Boolean-evaluation oracle for one meter."""
        if formula.evaluate(self.valid_attributes(gid)):
            return Outcome.DELIVERED
        if formula.evaluate(self._user(gid).held_attributes()):
            return Outcome.AUTH_FAIL
        return Outcome.UNSATISFIED

    # -- downlink ------------------------------------------------------------

    def _hops(self) -> List[Hop]:
        s = self.settings
        return [
            Hop(name="DCC", latency_ms=s.dcc_latency_ms),
            Hop(name="WAN", latency_ms=s.wan_latency_ms),
            Hop(name="NAN", latency_ms=s.nan_latency_ms),
            Hop(name="BAN", latency_ms=s.ban_latency_ms),
        ]

    def publish_multicast(self, sender: str, policy_text: str, payload: bytes) -> DownlinkEvent:
        gp = self._ensure_setup()
        actor = self.actors.get(sender)
        if actor is None:
            raise ConfigurationError(f"{sender!r} is not a registered DNO or vendor")
        publics = {name: a.keypair.public for name, a in self.actors.items()}
        text = signcrypt(gp, payload, policy_text, actor.signer_key, publics, self.rng)
        broadcast = self.dcc.revoke(text, self.rng)
        formula = parse_policy(policy_text)

        outcomes: Dict[str, Outcome] = {}
        expected: Dict[str, Outcome] = {}
        for gid in sorted(self.users):
            ring = self.users[gid].keyring
            try:
                message = designcrypt(
                    gp,
                    broadcast,
                    ring.verification_key_for(sender),
                    ring.decryption_keys.values(),
                    ring.prime,
                )
            except Unsatisfied:
                outcomes[gid] = Outcome.UNSATISFIED
            except AuthenticationFailure:
                outcomes[gid] = Outcome.AUTH_FAIL
            else:
                if message != payload:  # pragma: no cover - AEAD makes this unreachable
                    logger.error(f"Meter {gid} accepted a wrong plaintext")
                    outcomes[gid] = Outcome.AUTH_FAIL
                else:
                    outcomes[gid] = Outcome.DELIVERED
            expected[gid] = self.expected_outcome(formula, gid)

        hops = self._hops()
        sent_at = self.clock_ms
        self.clock_ms = sent_at + sum(h.latency_ms for h in hops)
        event = DownlinkEvent(
            seq=len(self.events),
            sender=sender,
            policy=policy_text,
            payload_sha256=hashlib.sha256(payload).hexdigest(),
            sent_at_ms=sent_at,
            delivered_at_ms=self.clock_ms,
            hops=hops,
            outcomes=outcomes,
            expected=expected,
            oracle_agrees=outcomes == expected,
        )
        self.events.append(event)
        delivered = len(event.delivered())
        logger.info(
            f"Multicast {event.seq} from {sender} delivered to {delivered}/{len(outcomes)} meters",
            extra={"seq": event.seq, "sender": sender, "rows": text.policy.rows},
        )
        if not event.oracle_agrees:
            logger.warning(f"Multicast {event.seq} disagrees with the policy oracle")
        return event
