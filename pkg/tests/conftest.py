from types import SimpleNamespace

import pytest

from mabs.pairing import MockProvider
from mabs.randomness import make_rng
from mabs.scheme import authority_setup, setup_from_controllers, sign_key_gen

AUTHORITY_ATTRIBUTES = {
    "dnoA": ["dnoA.region1", "dnoA.region2"],
    "vendorA": ["vendorA.dlc", "vendorA.fw"],
}
SIGNER_IDENTITIES = {"dnoA": "dnoA.s", "vendorA": "vendorA.s"}


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("MABS_SEED", "MABS_PROVIDER", "MABS_RELAY_HMAC_SECRET", "MABS_AEAD"):
        monkeypatch.delenv(name, raising=False)
    yield


@pytest.fixture
def provider():
    return MockProvider(seed=0, order=1009)


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture
def gp(provider):
    return setup_from_controllers(provider, AUTHORITY_ATTRIBUTES, SIGNER_IDENTITIES)


@pytest.fixture
def world(gp, rng):
    """Two companies that are both attribute authorities and signers."""
    keypairs = {name: authority_setup(gp, name, rng) for name in sorted(AUTHORITY_ATTRIBUTES)}
    signers = {name: sign_key_gen(gp, name, rng) for name in sorted(SIGNER_IDENTITIES)}
    return SimpleNamespace(
        gp=gp,
        rng=rng,
        keypairs=keypairs,
        publics={name: kp.public for name, kp in keypairs.items()},
        signers=signers,
    )


def random_formula(rng, leaves, attrs):
    """Random AND/OR tree over ``attrs`` with exactly ``leaves`` leaves."""
    if leaves == 1:
        return rng.choice(attrs)
    left = rng.randint(1, leaves - 1)
    op = rng.choice(["AND", "OR"])
    return f"({random_formula(rng, left, attrs)} {op} {random_formula(rng, leaves - left, attrs)})"
