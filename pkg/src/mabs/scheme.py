"""Multi-authority attribute-based signcryption.

Eight algorithms: global setup, authority setup, signer key generation,
decryption/verification key generation, signcryption, revocation (see
:mod:`mabs.revocation`) and designcryption.

Per policy row x with share lambda_x, zero-share w_x and fresh t_x::

    C1 = e(g,g)^lambda_x * e(g,g)^(alpha_rho(x) * t_x)     target
    C2 = g^-t_x                                             source 2
    C3 = g^(y_rho(x) * t_x) * g^w_x                         source 2
    C4 = F(delta(x))^t_x                                    source 1

and a key K = g^alpha H(gid)^y F(u)^t, K' = g^t turns the row into
``C1 e(K,C2) e(H(gid),C3) e(C4,K') = e(g,g)^lambda_x e(H(gid),g)^w_x``.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, fields
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from .config import SETTINGS
from .crt import recover_group_key
from .envelope import (
    NONCE_SIZE,
    AeadHeader,
    aead_from_name,
    derive_key,
    kdf_from_name,
    open_sealed,
    seal,
)
from .errors import (
    AuthenticationFailure,
    ConfigurationError,
    DimensionError,
    EncodingError,
    KeyMismatchError,
    MissingAuthorityKeyError,
    PolicyShapeError,
    Unsatisfied,
    UnknownControllerError,
)
from .models import GlobalParamsDocument
from .pairing import (
    BilinearParams,
    BilinearProvider,
    GroupElement,
    Role,
    provider_from_descriptor,
)
from .policy import (
    AccessPolicy,
    GateKind,
    Leaf,
    Node,
    PolicyFormula,
    compile_lss,
    parse_policy,
    reconstruct_from_rows,
    share_secret,
    share_zero,
)
from .randomness import Rng, make_rng, random_bytes

logger = logging.getLogger(__name__)

_LABEL = re.compile(r"^[^\s()]+$")

UserPrime = Union[int, Mapping[str, int]]


def _check_label(label: str, kind: str) -> str:
    if not isinstance(label, str) or not _LABEL.match(label) or label.upper() in ("AND", "OR"):
        raise ConfigurationError(f"invalid {kind} label {label!r}")
    return label


def _scalar(
    provider: BilinearProvider, rng: Optional[Rng], forced: Optional[int], nonzero: bool, name: str
) -> int:
    if forced is None:
        return provider.random_scalar(rng if rng is not None else make_rng(), nonzero=nonzero)
    low = 1 if nonzero else 0
    if not low <= forced < provider.order:
        raise ValueError(f"{name} must lie in [{low}, {provider.order})")
    return forced


# -- global parameters -----------------------------------------------------------


@dataclass(frozen=True)
class GlobalParams:
    """GP = {p, G, g, H, F, U, U_Psi, T}; the prime registry lives with the DCC."""

    provider: BilinearProvider
    attributes: FrozenSet[str]
    identity_attributes: FrozenSet[str]
    authorities: FrozenSet[str]
    signers: FrozenSet[str]
    controller_map: Dict[str, str] = field(hash=False)
    security_parameter: int
    identities: FrozenSet[str] = frozenset()

    @property
    def order(self) -> int:
        return self.provider.order

    @property
    def bilinear(self) -> BilinearParams:
        return self.provider.params

    def controller(self, attribute: str) -> str:
        """T(attribute)."""
        try:
            return self.controller_map[attribute]
        except KeyError:
            raise ConfigurationError(f"attribute {attribute!r} is not in the universe")

    def identity_attribute_of(self, signer: str) -> str:
        if signer not in self.signers:
            raise UnknownControllerError(f"{signer!r} is not a signer")
        for attr in self.identity_attributes:
            if self.controller_map[attr] == signer:
                return attr
        raise ConfigurationError(f"signer {signer!r} has no identity attribute")  # pragma: no cover

    def check_identity(self, gid: str) -> str:
        if not gid:
            raise ConfigurationError("gid must be non-empty")
        if self.identities and gid not in self.identities:
            raise ConfigurationError(f"gid {gid!r} is not in the identity universe")
        return gid

    def compile(self, policy_text: str) -> Tuple[PolicyFormula, AccessPolicy]:
        """Parse, check every label against U, and compile with rho = T o delta."""
        formula = parse_policy(policy_text)
        unknown = sorted(formula.attributes() - self.attributes - self.identity_attributes)
        if unknown:
            raise ConfigurationError(f"policy mentions attributes outside the universe: {unknown}")
        return formula, compile_lss(formula, self.order, self.controller)

    def to_document(self) -> GlobalParamsDocument:
        g = self.bilinear
        return GlobalParamsDocument(
            provider=self.provider.descriptor(),
            security_parameter=self.security_parameter,
            attributes=sorted(self.attributes),
            identity_attributes=sorted(self.identity_attributes),
            authorities=sorted(self.authorities),
            signers=sorted(self.signers),
            controller_map=dict(sorted(self.controller_map.items())),
            identities=sorted(self.identities),
            generators={
                "g1": self.provider.serialize(g.generator_g1).hex(),
                "g2": self.provider.serialize(g.generator_g2).hex(),
                "gt": self.provider.serialize(g.pairing_of_generators).hex(),
            },
        )

    @classmethod
    def from_document(
        cls, doc: GlobalParamsDocument, provider: Optional[BilinearProvider] = None
    ) -> "GlobalParams":
        provider = provider or provider_from_descriptor(doc.provider)
        if doc.generators:
            expected = {
                "g1": provider.serialize(provider.g1()).hex(),
                "g2": provider.serialize(provider.g2()).hex(),
                "gt": provider.serialize(provider.gt()).hex(),
            }
            if doc.generators != expected:
                raise EncodingError("global parameters were produced by a different provider")
        identity_attrs = set(doc.identity_attributes)
        return global_setup(
            provider,
            attributes=doc.attributes,
            identity_attributes=identity_attrs,
            authorities=doc.authorities,
            signers=doc.signers,
            controller_map=doc.controller_map,
            security_parameter=doc.security_parameter,
            identities=doc.identities,
        )


def global_setup(
    provider: BilinearProvider,
    attributes: Iterable[str],
    identity_attributes: Iterable[str],
    authorities: Iterable[str],
    signers: Iterable[str],
    controller_map: Mapping[str, str],
    security_parameter: Optional[int] = None,
    identities: Iterable[str] = (),
) -> GlobalParams:
    """Trusted-authority setup: validate the universes and T, bind them to a provider."""
    u1 = frozenset(_check_label(a, "attribute") for a in attributes)
    u2 = frozenset(_check_label(a, "identity attribute") for a in identity_attributes)
    theta = frozenset(_check_label(a, "authority") for a in authorities)
    phi = frozenset(_check_label(a, "signer") for a in signers)
    if not u1:
        raise ConfigurationError("attribute universe is empty")
    if u1 & u2:
        raise ConfigurationError(f"labels in both U_1 and U_2: {sorted(u1 & u2)}")
    missing = sorted((u1 | u2) - set(controller_map))
    if missing:
        raise ConfigurationError(f"controller map is not total; missing {missing}")
    for attr in u1:
        if controller_map[attr] not in theta:
            raise UnknownControllerError(
                f"{attr!r} maps to {controller_map[attr]!r}, not an authority"
            )
    for attr in u2:
        if controller_map[attr] not in phi:
            raise UnknownControllerError(f"{attr!r} maps to {controller_map[attr]!r}, not a signer")
    for signer in phi:
        owned = [a for a in u2 if controller_map[a] == signer]
        if len(owned) != 1:
            raise ConfigurationError(
                f"signer {signer!r} must control exactly one identity attribute, has {len(owned)}"
            )
    kappa = security_parameter or SETTINGS.security_parameter or provider.security_bits
    if kappa > provider.security_bits:
        raise ConfigurationError(
            f"security parameter {kappa} exceeds what the {provider.name} provider offers "
            f"({provider.security_bits} bits)"
        )
    gp = GlobalParams(
        provider=provider,
        attributes=u1,
        identity_attributes=u2,
        authorities=theta,
        signers=phi,
        controller_map={a: controller_map[a] for a in sorted(u1 | u2)},
        security_parameter=kappa,
        identities=frozenset(identities),
    )
    logger.info(
        f"Global setup on {provider.name} provider: {len(u1)} attributes, "
        f"{len(theta)} authorities, {len(phi)} signers"
    )
    return gp


def setup_from_controllers(
    provider: BilinearProvider,
    authority_attributes: Mapping[str, Iterable[str]],
    signer_identities: Mapping[str, str],
    security_parameter: Optional[int] = None,
) -> GlobalParams:
    """Build U, U_Psi and T from ``{authority: attrs}`` and ``{signer: identity attr}``."""
    controller_map: Dict[str, str] = {}
    for authority, attrs in authority_attributes.items():
        for attr in attrs:
            if attr in controller_map:
                raise ConfigurationError(f"attribute {attr!r} has two controllers")
            controller_map[attr] = authority
    for signer, identity in signer_identities.items():
        if identity in controller_map:
            raise ConfigurationError(f"identity attribute {identity!r} is already controlled")
        controller_map[identity] = signer
    return global_setup(
        provider,
        attributes=[a for attrs in authority_attributes.values() for a in attrs],
        identity_attributes=signer_identities.values(),
        authorities=authority_attributes.keys(),
        signers=signer_identities.keys(),
        controller_map=controller_map,
        security_parameter=security_parameter,
    )


# -- keys ------------------------------------------------------------------------


@dataclass(frozen=True)
class AuthorityPublicKey:
    controller: str
    e_gg_alpha: GroupElement
    g_y: GroupElement


@dataclass(frozen=True, repr=False)
class AuthoritySecretKey:
    controller: str
    alpha: int
    y: int

    def __repr__(self) -> str:
        return f"AuthoritySecretKey(controller={self.controller!r})"


@dataclass(frozen=True)
class AuthorityKeypair:
    public: AuthorityPublicKey
    secret: AuthoritySecretKey


@dataclass(frozen=True, repr=False)
class SignerKey:
    """alpha_phi, y_phi: known only to the signer, no public counterpart."""

    signer: str
    identity_attribute: str
    alpha: int
    y: int

    def __repr__(self) -> str:
        return f"SignerKey(signer={self.signer!r})"


@dataclass(frozen=True)
class DecryptionKey:
    gid: str
    attribute: str
    k: GroupElement
    k_prime: GroupElement


@dataclass(frozen=True)
class VerificationKey:
    gid: str
    signer: str
    attribute: str
    k: GroupElement
    k_prime: GroupElement


def authority_setup(
    gp: GlobalParams,
    theta: str,
    rng: Optional[Rng] = None,
    alpha: Optional[int] = None,
    y: Optional[int] = None,
) -> AuthorityKeypair:
    if theta not in gp.authorities:
        raise UnknownControllerError(f"{theta!r} is not an attribute authority")
    provider = gp.provider
    rng = rng if rng is not None else make_rng()
    alpha = _scalar(provider, rng, alpha, True, "alpha")
    y = _scalar(provider, rng, y, True, "y")
    public = AuthorityPublicKey(theta, provider.gt() ** alpha, provider.g2() ** y)
    logger.info(f"Authority {theta} key pair generated")
    return AuthorityKeypair(public, AuthoritySecretKey(theta, alpha, y))


def sign_key_gen(
    gp: GlobalParams,
    phi: str,
    rng: Optional[Rng] = None,
    alpha: Optional[int] = None,
    y: Optional[int] = None,
) -> SignerKey:
    if phi not in gp.signers:
        raise UnknownControllerError(f"{phi!r} is not a signer")
    rng = rng if rng is not None else make_rng()
    alpha = _scalar(gp.provider, rng, alpha, True, "alpha_phi")
    y = _scalar(gp.provider, rng, y, True, "y_phi")
    logger.info(f"Signer {phi} key generated")
    return SignerKey(phi, gp.identity_attribute_of(phi), alpha, y)


def _attribute_key(gp: GlobalParams, gid: str, attr: str, alpha: int, y: int, t: int):
    provider = gp.provider
    k = (
        (provider.g1() ** alpha)
        * (provider.hash_to_identity_group(gid) ** y)
        * (provider.hash_to_attribute_group(attr) ** t)
    )
    return k, provider.g2() ** t


def dec_key_gen(
    gp: GlobalParams,
    gid: str,
    u: str,
    authority_secret: AuthoritySecretKey,
    rng: Optional[Rng] = None,
    t: Optional[int] = None,
) -> DecryptionKey:
    """K = g^alpha H(gid)^y F(u)^t, K' = g^t."""
    gp.check_identity(gid)
    if u not in gp.attributes:
        raise KeyMismatchError(f"{u!r} is not an authority-controlled attribute")
    if gp.controller(u) != authority_secret.controller:
        raise KeyMismatchError(
            f"{u!r} is controlled by {gp.controller(u)!r}, not {authority_secret.controller!r}"
        )
    t = _scalar(gp.provider, rng, t, False, "t")
    k, k_prime = _attribute_key(gp, gid, u, authority_secret.alpha, authority_secret.y, t)
    logger.info(f"Issued decryption key for {u}", extra={"gid": gid, "attribute": u})
    return DecryptionKey(gid, u, k, k_prime)


def ver_key_gen(
    gp: GlobalParams,
    gid: str,
    phi: str,
    signer_key: SignerKey,
    rng: Optional[Rng] = None,
    r: Optional[int] = None,
) -> VerificationKey:
    """Same shape as a decryption key, over the signer's identity attribute."""
    gp.check_identity(gid)
    if phi not in gp.signers:
        raise UnknownControllerError(f"{phi!r} is not a signer")
    if signer_key.signer != phi:
        raise KeyMismatchError(f"signer key belongs to {signer_key.signer!r}, not {phi!r}")
    s = gp.identity_attribute_of(phi)
    r = _scalar(gp.provider, rng, r, False, "r")
    k, k_prime = _attribute_key(gp, gid, s, signer_key.alpha, signer_key.y, r)
    logger.info(f"Issued verification key for {phi}", extra={"gid": gid, "signer": phi})
    return VerificationKey(gid, phi, s, k, k_prime)


# -- ciphertexts -----------------------------------------------------------------


@dataclass(frozen=True)
class CiphertextRow:
    c1: GroupElement
    c2: GroupElement
    c3: GroupElement
    c4: GroupElement


@dataclass(frozen=True)
class SigncryptedText:
    """Policy in the clear, C = M_hat * e(g,g)^z, one record per row, sealed payload."""

    policy: AccessPolicy
    signer_row: int
    c: GroupElement
    rows: Tuple[CiphertextRow, ...]
    header: AeadHeader
    payload: bytes
    tag: bytes

    @property
    def signer(self) -> str:
        return self.policy.rho[self.signer_row]

    @property
    def associated_data(self) -> bytes:
        return self.header.encode() + self.policy.to_bytes()


@dataclass(frozen=True)
class RevokedText(SigncryptedText):
    """C2 re-blinded per attribute row plus the CRT solution B_x (None on the signer row)."""

    crt_solutions: Tuple[Optional[int], ...] = ()

    @classmethod
    def from_signcrypted(
        cls,
        text: SigncryptedText,
        rows: Sequence[CiphertextRow],
        crt_solutions: Sequence[Optional[int]],
    ) -> "RevokedText":
        base = {f.name: getattr(text, f.name) for f in fields(SigncryptedText)}
        base["rows"] = tuple(rows)
        return cls(**base, crt_solutions=tuple(crt_solutions))


@dataclass(frozen=True)
class SigncryptCoins:
    """Every random choice of one signcryption, injectable for exact tests."""

    z: int
    v: Tuple[int, ...]
    w: Tuple[int, ...]
    t: Tuple[int, ...]
    kem: int
    nonce: bytes

    @classmethod
    def sample(cls, provider: BilinearProvider, policy: AccessPolicy, rng: Rng) -> "SigncryptCoins":
        n, rows = policy.cols, policy.rows
        return cls(
            z=provider.random_scalar(rng),
            v=tuple(provider.random_scalar(rng) for _ in range(n - 1)),
            w=tuple(provider.random_scalar(rng) for _ in range(n - 1)),
            t=tuple(provider.random_scalar(rng, nonzero=True) for _ in range(rows)),
            kem=provider.random_scalar(rng, nonzero=True),
            nonce=random_bytes(rng, NONCE_SIZE),
        )

    def check(self, policy: AccessPolicy) -> None:
        if len(self.v) != policy.cols - 1 or len(self.w) != policy.cols - 1:
            raise DimensionError(f"v and w need {policy.cols - 1} entries")
        if len(self.t) != policy.rows:
            raise DimensionError(f"t needs {policy.rows} entries, got {len(self.t)}")
        if len(self.nonce) != NONCE_SIZE:
            raise DimensionError(f"nonce must be {NONCE_SIZE} bytes")


def _top_conjuncts(node: Node) -> Iterable[Node]:
    if isinstance(node, Leaf) or node.kind != GateKind.AND:
        yield node
        return
    yield from _top_conjuncts(node.left)
    yield from _top_conjuncts(node.right)


def check_policy_shape(gp: GlobalParams, formula: PolicyFormula) -> str:
    """Return the signer identity attribute of a well-shaped policy.

    The root must be an AND and exactly one leaf may carry a U_2 attribute;
    that leaf must be one of the root's top-level conjuncts.
    """
    identities = [a for a in formula.leaves() if a in gp.identity_attributes]
    if len(identities) != 1:
        raise PolicyShapeError(
            f"policy must contain exactly one signer identity attribute, found {len(identities)}"
        )
    identity = identities[0]
    if isinstance(formula.root, Leaf):
        raise PolicyShapeError("signer identity attribute must be AND-ed with an attribute formula")
    conjuncts = _top_conjuncts(formula.root)
    if not any(isinstance(n, Leaf) and n.attribute == identity for n in conjuncts):
        raise PolicyShapeError(f"{identity!r} must be a top-level conjunct of the policy")
    return identity


def locate_signer_row(gp: GlobalParams, policy: AccessPolicy) -> int:
    rows = [x for x, attr in enumerate(policy.delta) if attr in gp.identity_attributes]
    if len(rows) != 1:
        raise PolicyShapeError(f"expected one signer row, found {len(rows)}")
    return rows[0]


def signcrypt(
    gp: GlobalParams,
    message: bytes,
    policy_text: str,
    signer_key: SignerKey,
    authority_publics: Mapping[str, AuthorityPublicKey],
    rng: Optional[Rng] = None,
    coins: Optional[SigncryptCoins] = None,
    aead: Optional[str] = None,
) -> SigncryptedText:
    provider = gp.provider
    formula, policy = gp.compile(policy_text)
    identity = check_policy_shape(gp, formula)
    if identity != signer_key.identity_attribute or gp.controller(identity) != signer_key.signer:
        raise KeyMismatchError(f"{identity!r} is not controlled by signer {signer_key.signer!r}")
    signer_row = policy.delta.index(identity)

    needed = {policy.rho[x] for x in range(policy.rows) if x != signer_row}
    missing = sorted(needed - set(authority_publics))
    if missing:
        raise MissingAuthorityKeyError(f"no public key for authorities {missing}")
    for theta in needed:
        if authority_publics[theta].controller != theta:
            raise KeyMismatchError(f"public key filed under {theta!r} belongs to another authority")

    if coins is None:
        coins = SigncryptCoins.sample(provider, policy, rng if rng is not None else make_rng())
    coins.check(policy)
    shares = share_secret(policy, coins.z, coins.v)
    zero_shares = share_zero(policy, coins.w)

    g2, gt = provider.g2(), provider.gt()
    rows = []
    for x in range(policy.rows):
        t = coins.t[x]
        if x == signer_row:
            e_alpha, g_y = gt ** signer_key.alpha, g2 ** signer_key.y
        else:
            pk = authority_publics[policy.rho[x]]
            e_alpha, g_y = pk.e_gg_alpha, pk.g_y
        rows.append(
            CiphertextRow(
                c1=(gt ** shares[x]) * (e_alpha ** t),
                c2=g2 ** (-t),
                c3=(g_y ** t) * (g2 ** zero_shares[x]),
                c4=provider.hash_to_attribute_group(policy.delta[x]) ** t,
            )
        )

    kem = gt ** coins.kem
    header = AeadHeader(
        kdf_from_name(SETTINGS.kdf), aead_from_name(aead or SETTINGS.aead), coins.nonce
    )
    key = derive_key(header, provider.serialize(kem))
    body, tag = seal(header, key, message, header.encode() + policy.to_bytes())
    logger.info(
        f"Signcrypted {len(message)} bytes for {signer_key.signer}",
        extra={"rows": policy.rows, "cols": policy.cols, "signer": signer_key.signer},
    )
    return SigncryptedText(
        policy=policy,
        signer_row=signer_row,
        c=kem * (gt ** coins.z),
        rows=tuple(rows),
        header=header,
        payload=body,
        tag=tag,
    )


# -- designcryption --------------------------------------------------------------


@dataclass(frozen=True)
class DesigncryptTrace:
    rows: Tuple[int, ...]
    coefficients: Tuple[int, ...]
    gids: Tuple[str, ...]
    group_keys: Dict[int, int]
    revoked_rows: Tuple[int, ...]
    components: Tuple[GroupElement, ...]
    aggregate: GroupElement
    kem: GroupElement


def _prime_for(own_prime: Optional[UserPrime], gid: str) -> Optional[int]:
    if own_prime is None:
        return None
    if isinstance(own_prime, Mapping):
        return own_prime.get(gid)
    return int(own_prime)


def designcrypt_trace(
    gp: GlobalParams,
    text: SigncryptedText,
    ver_key: Optional[VerificationKey],
    dec_keys: Iterable[DecryptionKey],
    own_prime: Optional[UserPrime] = None,
) -> DesigncryptTrace:
    """Recover M_hat and every intermediate, without touching the payload.

    Raises Unsatisfied when the held keys cannot satisfy the policy and
    AuthenticationFailure when they can but the rows they need were revoked.
    """
    provider = gp.provider
    policy = text.policy
    p = provider.order
    signer_attr = policy.delta[text.signer_row]
    if ver_key is None or ver_key.attribute != signer_attr:
        raise Unsatisfied(f"no verification key for {signer_attr}")

    keys: Dict[int, Union[DecryptionKey, VerificationKey]] = {text.signer_row: ver_key}
    by_attr: Dict[str, DecryptionKey] = {}
    for key in dec_keys:
        by_attr.setdefault(key.attribute, key)
    for x, attr in enumerate(policy.delta):
        if x != text.signer_row and attr in by_attr:
            keys[x] = by_attr[attr]

    revoked = isinstance(text, RevokedText)
    if revoked and own_prime is None:
        raise KeyMismatchError("a user prime is needed to designcrypt a revoked text")
    group_keys: Dict[int, int] = {}
    lost = []
    for x, key in keys.items():
        if x == text.signer_row or not revoked:
            continue
        q = _prime_for(own_prime, key.gid)
        beta = None if q is None else recover_group_key(text.crt_solutions[x], q)
        if beta is None or not 0 < beta < p:
            lost.append(x)
        else:
            group_keys[x] = beta

    if reconstruct_from_rows(policy, keys) is None:
        raise Unsatisfied("held keys do not satisfy the policy")
    recon = reconstruct_from_rows(policy, (x for x in keys if x not in lost))
    if recon is None:
        raise AuthenticationFailure("attribute rows needed for this policy were revoked")
    if text.signer_row not in recon.rows:  # pragma: no cover - the shape check forbids this
        raise Unsatisfied("signer row not part of the reconstruction")

    components = []
    gids = []
    for x in recon.rows:
        key, row = keys[x], text.rows[x]
        c2 = row.c2 ** pow(group_keys[x], -1, p) if x in group_keys else row.c2
        h = provider.hash_to_identity_group(key.gid)
        components.append(
            row.c1
            * provider.pair(key.k, c2)
            * provider.pair(h, row.c3)
            * provider.pair(row.c4, key.k_prime)
        )
        gids.append(key.gid)

    aggregate = provider.identity(Role.TARGET)
    for d_x, c in zip(components, recon.coefficients):
        aggregate = aggregate * (d_x ** c)
    return DesigncryptTrace(
        rows=recon.rows,
        coefficients=recon.coefficients,
        gids=tuple(gids),
        group_keys=group_keys,
        revoked_rows=tuple(sorted(lost)),
        components=tuple(components),
        aggregate=aggregate,
        kem=text.c / aggregate,
    )


def designcrypt(
    gp: GlobalParams,
    text: SigncryptedText,
    ver_key: Optional[VerificationKey],
    dec_keys: Iterable[DecryptionKey],
    own_prime: Optional[UserPrime] = None,
) -> bytes:
    """Decrypt and verify; any failure after reconstruction is AuthenticationFailure."""
    trace = designcrypt_trace(gp, text, ver_key, dec_keys, own_prime)
    key = derive_key(text.header, gp.provider.serialize(trace.kem))
    message = open_sealed(text.header, key, text.payload, text.tag, text.associated_data)
    logger.debug(f"Designcrypted {len(message)} bytes using rows {list(trace.rows)}")
    return message
