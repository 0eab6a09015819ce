"""Setup, key generation, signcryption and designcryption."""

from pathlib import Path

import pytest

from mabs.crt import recover_group_key
from mabs.envelope import AeadId
from mabs.errors import (
    AuthenticationFailure,
    ConfigurationError,
    DimensionError,
    KeyMismatchError,
    MissingAuthorityKeyError,
    PolicyShapeError,
    RandomnessExhausted,
    Unsatisfied,
    UnknownControllerError,
)
from mabs.models import GlobalParamsDocument
from mabs.pairing import MockProvider
from mabs.policy import share_secret, share_zero
from mabs.randomness import ScriptedRandom, make_rng
from mabs.revocation import AccessListTable, PrimeRegistry, revoke
from mabs.scheme import (
    GlobalParams,
    RevokedText,
    SignerKey,
    SigncryptCoins,
    authority_setup,
    dec_key_gen,
    designcrypt,
    designcrypt_trace,
    global_setup,
    setup_from_controllers,
    sign_key_gen,
    signcrypt,
    ver_key_gen,
)

from conftest import AUTHORITY_ATTRIBUTES, SIGNER_IDENTITIES, random_formula

MESSAGE = b"firmware image v2"
# Large mock order: accidental key agreement is negligible in the negative tests.
BIG_ORDER = (1 << 61) - 1
GOLDEN_GP = Path(__file__).parent / "data" / "global_params.json"


def _golden_setup():
    provider = MockProvider(seed=0, order=1009)
    gp = setup_from_controllers(provider, {"theta": ["theta.W"]}, {"phi": "phi.s"})
    keypair = authority_setup(gp, "theta", alpha=2, y=3)
    signer = sign_key_gen(gp, "phi", alpha=5, y=7)
    return provider, gp, keypair, signer


def _golden_coins():
    return SigncryptCoins(z=65, v=(3,), w=(9,), t=(3, 4), kem=17, nonce=bytes(12))


def _keys(world, gid, attributes, signer="vendorA"):
    gp = world.gp
    ver_key = ver_key_gen(gp, gid, signer, world.signers[signer], world.rng)
    dec_keys = [
        dec_key_gen(gp, gid, attr, world.keypairs[gp.controller(attr)].secret, world.rng)
        for attr in attributes
    ]
    return ver_key, dec_keys


def _big_world():
    provider = MockProvider(seed=1, order=BIG_ORDER)
    gp = setup_from_controllers(provider, AUTHORITY_ATTRIBUTES, SIGNER_IDENTITIES)
    rng = make_rng(99)

    class World:
        pass

    world = World()
    world.gp, world.rng = gp, rng
    world.keypairs = {name: authority_setup(gp, name, rng) for name in sorted(AUTHORITY_ATTRIBUTES)}
    world.publics = {name: kp.public for name, kp in world.keypairs.items()}
    world.signers = {name: sign_key_gen(gp, name, rng) for name in sorted(SIGNER_IDENTITIES)}
    return world


# -- setup -----------------------------------------------------------------------


def test_global_setup_valid(gp):
    """Two authorities, two signers, four attributes."""
    assert gp.attributes == frozenset(a for attrs in AUTHORITY_ATTRIBUTES.values() for a in attrs)
    assert gp.identity_attributes == {"dnoA.s", "vendorA.s"}
    assert gp.controller("vendorA.dlc") == "vendorA"
    assert gp.identity_attribute_of("dnoA") == "dnoA.s"


def test_global_setup_rejects_partial_controller_map(provider):
    """Every attribute needs a controller."""
    with pytest.raises(ConfigurationError):
        global_setup(
            provider,
            attributes=["a.x", "a.y"],
            identity_attributes=["s.s"],
            authorities=["a"],
            signers=["s"],
            controller_map={"a.x": "a", "s.s": "s"},
        )


@pytest.mark.parametrize(
    "kwargs, error",
    [
        (dict(attributes=[]), ConfigurationError),
        (dict(identity_attributes=["a.x"]), ConfigurationError),
        (dict(authorities=["other"]), UnknownControllerError),
        (dict(signers=["other"]), UnknownControllerError),
        (dict(attributes=["a x"]), ConfigurationError),
        (dict(attributes=["AND"]), ConfigurationError),
    ],
)
def test_global_setup_validation(provider, kwargs, error):
    """Universes, labels and T are cross-checked."""
    base = dict(
        attributes=["a.x"],
        identity_attributes=["s.s"],
        authorities=["a"],
        signers=["s"],
        controller_map={"a.x": "a", "s.s": "s", "a x": "a", "AND": "a"},
    )
    base.update(kwargs)
    with pytest.raises(error):
        global_setup(provider, **base)


def test_signer_needs_exactly_one_identity(provider):
    """A signer controls exactly one U_2 attribute."""
    with pytest.raises(ConfigurationError):
        global_setup(
            provider,
            attributes=["a.x"],
            identity_attributes=["s.s", "s.t"],
            authorities=["a"],
            signers=["s"],
            controller_map={"a.x": "a", "s.s": "s", "s.t": "s"},
        )


def test_security_parameter_bounded_by_provider(provider):
    """kappa cannot exceed what the provider offers."""
    with pytest.raises(ConfigurationError):
        setup_from_controllers(provider, {"a": ["a.x"]}, {"s": "s.s"}, security_parameter=200)


def test_global_params_document_is_reproducible(provider, gp):
    """The canonical document matches the checked-in copy and rebuilds the same parameters."""
    assert gp.to_document().canonical_json() == GOLDEN_GP.read_text(encoding="utf-8")
    again = setup_from_controllers(
        MockProvider(seed=0, order=1009), AUTHORITY_ATTRIBUTES, SIGNER_IDENTITIES
    )
    text = gp.to_document().canonical_json()
    assert text == again.to_document().canonical_json()
    rebuilt = GlobalParams.from_document(GlobalParamsDocument.model_validate_json(text))
    assert rebuilt.attributes == gp.attributes
    assert rebuilt.controller_map == gp.controller_map
    assert rebuilt.to_document().canonical_json() == text


# -- keys ------------------------------------------------------------------------


def test_authority_setup_forced(gp, provider):
    """Forced alpha=2, y=3 give (gt^2, g2^3)."""
    keypair = authority_setup(gp, "dnoA", alpha=2, y=3)
    assert provider.log(keypair.public.e_gg_alpha) == 2
    assert provider.log(keypair.public.g_y) == 3
    assert "alpha" not in repr(keypair.secret)


def test_authority_setup_errors(gp, rng):
    """Unknown authority and fresh randomness."""
    with pytest.raises(UnknownControllerError):
        authority_setup(gp, "vendorB", rng)
    a, b = authority_setup(gp, "dnoA", rng), authority_setup(gp, "dnoA", rng)
    assert a.secret != b.secret


def test_sign_key_gen(gp):
    """Forced exponents are kept verbatim; exhausted randomness surfaces."""
    key = sign_key_gen(gp, "vendorA", alpha=5, y=7)
    assert (key.alpha, key.y, key.identity_attribute) == (5, 7, "vendorA.s")
    with pytest.raises(UnknownControllerError):
        sign_key_gen(gp, "vendorB")
    with pytest.raises(RandomnessExhausted):
        sign_key_gen(gp, "vendorA", ScriptedRandom([0]))
    with pytest.raises(ValueError):
        sign_key_gen(gp, "vendorA", alpha=0, y=1)


def test_dec_key_gen_exponents(gp, provider):
    """log K = alpha + h*y + f*t and log K' = t."""
    secret = authority_setup(gp, "vendorA", alpha=2, y=3).secret
    h = provider.log(provider.hash_to_identity_group("meter-1"))
    f = provider.log(provider.hash_to_attribute_group("vendorA.dlc"))
    key = dec_key_gen(gp, "meter-1", "vendorA.dlc", secret, t=4)
    assert provider.log(key.k) == (2 + h * 3 + f * 4) % 1009
    assert provider.log(key.k_prime) == 4
    zero = dec_key_gen(gp, "meter-1", "vendorA.dlc", secret, t=0)
    assert provider.log(zero.k) == (2 + h * 3) % 1009


def test_dec_key_gen_wrong_authority(world):
    """An authority cannot issue keys for attributes it does not control."""
    with pytest.raises(KeyMismatchError):
        dec_key_gen(world.gp, "m", "dnoA.region1", world.keypairs["vendorA"].secret, world.rng)
    with pytest.raises(KeyMismatchError):
        dec_key_gen(world.gp, "m", "vendorA.s", world.keypairs["vendorA"].secret, world.rng)


def test_ver_key_gen(gp, provider):
    """Verification keys mirror decryption keys over the identity attribute."""
    signer = sign_key_gen(gp, "vendorA", alpha=5, y=7)
    h = provider.log(provider.hash_to_identity_group("meter-1"))
    s = provider.log(provider.hash_to_attribute_group("vendorA.s"))
    key = ver_key_gen(gp, "meter-1", "vendorA", signer, r=6)
    assert key.attribute == "vendorA.s"
    assert provider.log(key.k) == (5 + h * 7 + s * 6) % 1009
    with pytest.raises(KeyMismatchError):
        ver_key_gen(gp, "meter-1", "dnoA", signer)


# -- signcryption ----------------------------------------------------------------


def test_signcrypt_golden_exponents():
    """Every ciphertext component follows the row formulas."""
    provider, gp, keypair, signer = _golden_setup()
    text = signcrypt(
        gp, MESSAGE, "phi.s AND theta.W", signer, {"theta": keypair.public}, coins=_golden_coins()
    )
    assert text.signer_row == 0 and text.signer == "phi"
    assert text.policy.signed() == [[1, 1], [0, -1]]
    signer_row, attr_row = text.rows
    assert [provider.log(e) for e in (signer_row.c1, signer_row.c2, signer_row.c3)] == [
        83,
        1009 - 3,
        30,
    ]
    assert [provider.log(e) for e in (attr_row.c1, attr_row.c2, attr_row.c3)] == [
        5,
        1009 - 4,
        3,
    ]
    f = provider.log(provider.hash_to_attribute_group("theta.W"))
    assert provider.log(attr_row.c4) == (f * 4) % 1009
    assert provider.log(text.c) == 17 + 65


def test_designcrypt_trace_cancels_cross_terms():
    """Each D_x reduces to lambda_x + h*w_x and the aggregate to z."""
    provider, gp, keypair, signer = _golden_setup()
    coins = _golden_coins()
    text = signcrypt(
        gp, MESSAGE, "phi.s AND theta.W", signer, {"theta": keypair.public}, coins=coins
    )
    ver_key = ver_key_gen(gp, "meter", "phi", signer, r=10)
    dec_key = dec_key_gen(gp, "meter", "theta.W", keypair.secret, t=11)
    trace = designcrypt_trace(gp, text, ver_key, [dec_key])
    lam = share_secret(text.policy, coins.z, coins.v)
    w = share_zero(text.policy, coins.w)
    h = provider.log(provider.hash_to_identity_group("meter"))
    assert trace.rows == (0, 1)
    for x, component in zip(trace.rows, trace.components):
        assert provider.log(component) == (lam[x] + h * w[x]) % 1009
    assert provider.log(trace.aggregate) == 65
    assert provider.log(trace.kem) == 17
    assert designcrypt(gp, text, ver_key, [dec_key]) == MESSAGE


def test_signcrypt_shape_rules(world):
    """The identity attribute must be a top-level conjunct of an AND root."""
    signer = world.signers["vendorA"]
    for policy in ("vendorA.dlc", "vendorA.s", "vendorA.s OR vendorA.dlc",
                   "(vendorA.s OR dnoA.region1) AND vendorA.dlc",
                   "vendorA.s AND dnoA.s AND vendorA.dlc"):
        with pytest.raises(PolicyShapeError):
            signcrypt(world.gp, MESSAGE, policy, signer, world.publics, world.rng)
    text = signcrypt(
        world.gp, MESSAGE, "vendorA.dlc AND vendorA.s", signer, world.publics, world.rng
    )
    assert text.signer_row == 1


def test_signcrypt_key_errors(world):
    """Wrong signer, unknown attributes and missing public keys are refused."""
    with pytest.raises(KeyMismatchError):
        signcrypt(world.gp, MESSAGE, "dnoA.s AND vendorA.dlc", world.signers["vendorA"],
                  world.publics, world.rng)
    with pytest.raises(ConfigurationError):
        signcrypt(world.gp, MESSAGE, "vendorA.s AND vendorA.nope", world.signers["vendorA"],
                  world.publics, world.rng)
    with pytest.raises(MissingAuthorityKeyError):
        signcrypt(world.gp, MESSAGE, "vendorA.s AND dnoA.region1", world.signers["vendorA"],
                  {"vendorA": world.publics["vendorA"]}, world.rng)


def test_signcrypt_coins_dimension_checked():
    """Coins must fit the policy."""
    provider, gp, keypair, signer = _golden_setup()
    coins = SigncryptCoins(z=1, v=(1, 2), w=(1,), t=(1, 1), kem=1, nonce=bytes(12))
    with pytest.raises(DimensionError):
        signcrypt(gp, MESSAGE, "phi.s AND theta.W", signer, {"theta": keypair.public},
                  coins=coins)


# -- designcryption --------------------------------------------------------------


def test_roundtrip_without_revocation(world):
    """A plain signcrypted text opens without a user prime."""
    text = signcrypt(world.gp, MESSAGE, "vendorA.s AND (vendorA.dlc OR dnoA.region1)",
                     world.signers["vendorA"], world.publics, world.rng)
    ver_key, dec_keys = _keys(world, "meter-1", ["dnoA.region1"])
    assert designcrypt(world.gp, text, ver_key, dec_keys) == MESSAGE


def test_roundtrip_with_chacha(world):
    """The AEAD choice travels in the header."""
    text = signcrypt(world.gp, MESSAGE, "vendorA.s AND vendorA.dlc", world.signers["vendorA"],
                     world.publics, world.rng, aead="chacha20-poly1305")
    assert text.header.aead == AeadId.CHACHA20_POLY1305
    ver_key, dec_keys = _keys(world, "meter-1", ["vendorA.dlc"])
    assert designcrypt(world.gp, text, ver_key, dec_keys) == MESSAGE


def test_roundtrip_after_revocation(world):
    """Members recover the group key; revoked holders fail authentication."""
    gp, rng = world.gp, world.rng
    registry = PrimeRegistry.for_order(gp.order)
    q1, q2 = registry.assign("meter-1", rng), registry.assign("meter-2", rng)
    table = AccessListTable(registry, {"vendorA.dlc": ["meter-1"]})
    text = signcrypt(gp, MESSAGE, "vendorA.s AND vendorA.dlc", world.signers["vendorA"],
                     world.publics, rng)
    broadcast = revoke(gp.provider, text, registry, table, rng)
    assert isinstance(broadcast, RevokedText)
    assert broadcast.rows[broadcast.signer_row] == text.rows[text.signer_row]
    assert broadcast.crt_solutions[broadcast.signer_row] is None

    ver1, keys1 = _keys(world, "meter-1", ["vendorA.dlc"])
    assert designcrypt(gp, broadcast, ver1, keys1, q1) == MESSAGE

    ver2, keys2 = _keys(world, "meter-2", ["vendorA.dlc"])
    with pytest.raises(AuthenticationFailure):
        designcrypt(gp, broadcast, ver2, keys2, q2)
    with pytest.raises(AuthenticationFailure) as info:
        designcrypt_trace(gp, broadcast, ver2, keys2, q2)
    assert info.value.outcome == "AUTH_FAIL"


def test_designcrypt_unsatisfied(world):
    """Missing verification key or attributes is UNSATISFIED."""
    text = signcrypt(world.gp, MESSAGE, "vendorA.s AND vendorA.dlc", world.signers["vendorA"],
                     world.publics, world.rng)
    ver_key, dec_keys = _keys(world, "meter-1", ["vendorA.dlc"])
    with pytest.raises(Unsatisfied):
        designcrypt(world.gp, text, None, dec_keys)
    other_ver, _ = _keys(world, "meter-1", [], signer="dnoA")
    with pytest.raises(Unsatisfied):
        designcrypt(world.gp, text, other_ver, dec_keys)
    with pytest.raises(Unsatisfied):
        designcrypt(world.gp, text, ver_key, [])


def test_revoked_text_needs_prime(world):
    """Without q_i a revoked text cannot be opened."""
    gp, rng = world.gp, world.rng
    registry = PrimeRegistry.for_order(gp.order)
    registry.assign("meter-1", rng)
    table = AccessListTable(registry, {"vendorA.dlc": ["meter-1"]})
    text = signcrypt(gp, MESSAGE, "vendorA.s AND vendorA.dlc", world.signers["vendorA"],
                     world.publics, rng)
    ver_key, dec_keys = _keys(world, "meter-1", ["vendorA.dlc"])
    with pytest.raises(KeyMismatchError):
        designcrypt(gp, revoke(gp.provider, text, registry, table, rng), ver_key, dec_keys)


def test_revoked_holder_with_alternative_path(world):
    """Revoking one OR branch leaves the other branch usable."""
    gp, rng = world.gp, world.rng
    registry = PrimeRegistry.for_order(gp.order)
    q = registry.assign("meter-1", rng)
    table = AccessListTable(registry, {"vendorA.dlc": [], "dnoA.region1": ["meter-1"]})
    text = signcrypt(gp, MESSAGE, "vendorA.s AND (vendorA.dlc OR dnoA.region1)",
                     world.signers["vendorA"], world.publics, rng)
    ver_key, dec_keys = _keys(world, "meter-1", ["vendorA.dlc", "dnoA.region1"])
    trace = designcrypt_trace(gp, revoke(gp.provider, text, registry, table, rng), ver_key,
                              dec_keys, q)
    assert trace.revoked_rows == (1,)
    assert 2 in trace.rows


def test_random_policies_follow_row_formulas(gp, provider, rng):
    """60 random policies: every component, the revoked C2 and each D_x match the exponents."""
    p, log = provider.order, provider.log
    keypairs = {name: authority_setup(gp, name, rng) for name in sorted(AUTHORITY_ATTRIBUTES)}
    publics = {name: kp.public for name, kp in keypairs.items()}
    signers = {name: sign_key_gen(gp, name, rng) for name in sorted(SIGNER_IDENTITIES)}
    attrs = sorted(gp.attributes)
    registry = PrimeRegistry.for_order(p)
    q = registry.assign("meter-1", rng)
    table = AccessListTable(registry, {attr: ["meter-1"] for attr in attrs})
    h = log(provider.hash_to_identity_group("meter-1"))

    for _ in range(60):
        signer = signers[rng.choice(sorted(signers))]
        formula = random_formula(rng, rng.randint(1, 8), attrs)
        policy_text = f"{signer.identity_attribute} AND {formula}"
        _, policy = gp.compile(policy_text)
        coins = SigncryptCoins.sample(provider, policy, rng)
        text = signcrypt(gp, MESSAGE, policy_text, signer, publics, coins=coins)
        lam = share_secret(policy, coins.z, coins.v)
        w = share_zero(policy, coins.w)
        for x, row in enumerate(text.rows):
            key = signer if x == text.signer_row else keypairs[policy.rho[x]].secret
            t = coins.t[x]
            f = log(provider.hash_to_attribute_group(policy.delta[x]))
            assert log(row.c1) == (lam[x] + key.alpha * t) % p
            assert log(row.c2) == (-t) % p
            assert log(row.c3) == (key.y * t + w[x]) % p
            assert log(row.c4) == (f * t) % p
        assert log(text.c) == (coins.kem + coins.z) % p

        broadcast = revoke(provider, text, registry, table, rng)
        for x, row in enumerate(broadcast.rows):
            if x == broadcast.signer_row:
                continue
            beta = recover_group_key(broadcast.crt_solutions[x], q)
            assert 0 < beta < p
            assert log(row.c2) == (-coins.t[x] * beta) % p

        ver_key = ver_key_gen(gp, "meter-1", signer.signer, signer, rng)
        dec_keys = [
            dec_key_gen(gp, "meter-1", attr, keypairs[gp.controller(attr)].secret, rng)
            for attr in attrs
        ]
        trace = designcrypt_trace(gp, broadcast, ver_key, dec_keys, q)
        assert trace.revoked_rows == ()
        for x, component in zip(trace.rows, trace.components):
            assert log(component) == (lam[x] + h * w[x]) % p
        assert log(trace.aggregate) == coins.z
        assert log(trace.kem) == coins.kem
        assert designcrypt(gp, broadcast, ver_key, dec_keys, q) == MESSAGE


def test_collusion_fails():
    """Two meters pooling keys leave a nonzero GID cross-term in every instance."""
    world = _big_world()
    gp, rng = world.gp, world.rng
    provider, p = gp.provider, gp.order
    attrs = sorted(gp.attributes)
    registry = PrimeRegistry.for_order(p)
    primes = {gid: registry.assign(gid, rng) for gid in ("meter-1", "meter-2")}
    table = AccessListTable(registry, {attr: sorted(primes) for attr in attrs})
    h = {gid: provider.log(provider.hash_to_identity_group(gid)) for gid in primes}

    for _ in range(50):
        name = rng.choice(sorted(world.signers))
        signer = world.signers[name]
        a, b = rng.sample(attrs, 2)
        policy_text = f"{signer.identity_attribute} AND {a} AND {b}"
        _, policy = gp.compile(policy_text)
        coins = SigncryptCoins.sample(provider, policy, rng)
        text = signcrypt(gp, MESSAGE, policy_text, signer, world.publics, coins=coins)
        ver1, keys1 = _keys(world, "meter-1", [a], signer=name)
        _, keys2 = _keys(world, "meter-2", [b], signer=name)
        pooled = keys1 + keys2

        with pytest.raises(AuthenticationFailure):
            designcrypt(gp, text, ver1, pooled)
        broadcast = revoke(provider, text, registry, table, rng)
        with pytest.raises(AuthenticationFailure):
            designcrypt(gp, broadcast, ver1, pooled, primes)

        trace = designcrypt_trace(gp, broadcast, ver1, pooled, primes)
        assert set(trace.gids) == set(primes)
        w = share_zero(policy, coins.w)
        cross = sum(
            c * h[gid] * w[x] for x, c, gid in zip(trace.rows, trace.coefficients, trace.gids)
        ) % p
        assert cross != 0
        assert (provider.log(trace.aggregate) - coins.z) % p == cross


def test_forged_signer_rejected():
    """50 texts signed with made-up signer exponents fail at every legitimate receiver."""
    world = _big_world()
    gp, rng = world.gp, world.rng
    provider = gp.provider
    attrs = sorted(gp.attributes)
    receivers = {
        name: [_keys(world, f"meter-{i}", attrs, signer=name) for i in range(3)]
        for name in sorted(world.signers)
    }

    for _ in range(50):
        name = rng.choice(sorted(world.signers))
        genuine = world.signers[name]
        alpha, y = genuine.alpha, genuine.y
        while (alpha, y) == (genuine.alpha, genuine.y):
            alpha = provider.random_scalar(rng, nonzero=True)
            y = provider.random_scalar(rng, nonzero=True)
        forged = SignerKey(
            signer=name, identity_attribute=genuine.identity_attribute, alpha=alpha, y=y
        )
        formula = random_formula(rng, rng.randint(1, 6), attrs)
        text = signcrypt(
            gp, MESSAGE, f"{genuine.identity_attribute} AND {formula}", forged, world.publics, rng
        )
        for ver_key, dec_keys in receivers[name]:
            with pytest.raises(AuthenticationFailure):
                designcrypt(gp, text, ver_key, dec_keys)


def test_tampered_payload_rejected(world):
    """Flipping a payload bit is caught by the AEAD."""
    text = signcrypt(world.gp, MESSAGE, "vendorA.s AND vendorA.dlc", world.signers["vendorA"],
                     world.publics, world.rng)
    ver_key, dec_keys = _keys(world, "meter-1", ["vendorA.dlc"])
    body = bytearray(text.payload)
    body[0] ^= 1
    forged = type(text)(text.policy, text.signer_row, text.c, text.rows, text.header,
                        bytes(body), text.tag)
    with pytest.raises(AuthenticationFailure):
        designcrypt(world.gp, forged, ver_key, dec_keys)
