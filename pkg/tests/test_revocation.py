"""CRT group-key transport, the prime registry and the DCC."""

import json
import random

import pytest
from sympy import isprime

from mabs.crt import crt_solve, has_mask_shape, mask, mask_width, recover_group_key
from mabs.errors import CRTError, EncodingError, RegistryError
from mabs.pairing import MockProvider
from mabs.revocation import (
    AccessListTable,
    DataCommunicationCompany,
    PrimeRegistry,
    assign_prime,
    load_access_lists,
    load_registry,
    revoke,
)
from mabs.scheme import signcrypt


def test_crt_examples():
    """Known systems and their unique solutions."""
    assert crt_solve([(2, 3), (3, 5), (2, 7)]) == 23
    assert crt_solve([(2, 7), (18, 23)]) == 156
    assert crt_solve([(4, 11)]) == 4
    assert crt_solve([]) == 0


def test_crt_exhaustive_uniqueness():
    """23 is the only solution below 105."""
    assert [b for b in range(105) if b % 3 == 2 and b % 5 == 3 and b % 7 == 2] == [23]


def test_crt_validation():
    """Residues out of range and shared factors are rejected."""
    with pytest.raises(CRTError):
        crt_solve([(7, 7)])
    with pytest.raises(CRTError):
        crt_solve([(1, 6), (1, 9)])
    with pytest.raises(CRTError):
        crt_solve([(0, 1), (0, 5)])
    assert isinstance(CRTError("x"), ValueError)


def test_group_key_recovery_examples():
    """beta=5 masked under q=7 and q=23."""
    assert mask(5, 7) == 2
    assert recover_group_key(2, 7) == 5
    assert mask(5, 23) == 18
    assert recover_group_key(156, 7) == 5
    assert recover_group_key(156, 23) == 5


def test_toy_mask_shape():
    """For a 3-bit order the candidate primes are 7 mod 8."""
    registry = PrimeRegistry(mask_width=3, extra_bits=2)
    assert has_mask_shape(23, 3) and has_mask_shape(31, 3)
    q = registry.assign("meter", random.Random(0))
    assert q in (23, 31)
    assert q % 8 == 7 and isprime(q)


def test_registry_distinct_primes():
    """1000 assignments give 1000 distinct primes with the right shape."""
    registry = PrimeRegistry.for_order(1009, extra_bits=24)
    rng = random.Random(7)
    primes = [assign_prime(registry, f"m{i}", rng) for i in range(1000)]
    assert len(set(primes)) == 1000
    width = mask_width(1009)
    assert all(has_mask_shape(q, width) and q.bit_length() == width + 24 for q in primes)


def test_registry_errors():
    """Duplicate gids, unknown gids and malformed primes."""
    registry = PrimeRegistry(mask_width=3, extra_bits=2)
    registry.assign("a", random.Random(1))
    with pytest.raises(RegistryError):
        registry.assign("a", random.Random(1))
    with pytest.raises(RegistryError):
        registry.get("missing")
    with pytest.raises(RegistryError):
        registry.record("b", 15)
    with pytest.raises(RegistryError):
        registry.record("b", 29)
    with pytest.raises(RegistryError):
        registry.record("b", registry.get("a"))


def test_registry_exhaustion():
    """The toy space holds two primes and no more."""
    registry = PrimeRegistry(mask_width=3, extra_bits=2)
    rng = random.Random(3)
    assert {registry.assign("a", rng), registry.assign("b", rng)} == {23, 31}
    with pytest.raises(RegistryError):
        registry.assign("c", rng)


def test_mask_never_exceeds_prime():
    """beta XOR q < q for every beta below p, over 10^4 samples."""
    order = 1009
    registry = PrimeRegistry.for_order(order)
    rng = random.Random(11)
    primes = [registry.assign(f"m{i}", rng) for i in range(20)]
    for _ in range(10_000):
        q = rng.choice(primes)
        beta = rng.randrange(1, order)
        assert mask(beta, q) < q
        assert recover_group_key(mask(beta, q), q) == beta


@pytest.mark.parametrize("size", [1, 2, 10, 100, 250])
def test_every_member_recovers(size):
    """Over 20 fresh group keys all members recover beta and a non-member never does."""
    order = 1009
    registry = PrimeRegistry.for_order(order)
    rng = random.Random(size)
    gids = [f"m{i}" for i in range(size + 1)]
    for gid in gids:
        registry.assign(gid, rng)
    members, outsider = gids[:-1], gids[-1]
    for _ in range(20):
        beta = rng.randrange(1, order)
        solution = crt_solve(
            [(mask(beta, registry.get(g)), registry.get(g)) for g in members],
            check_coprime=False,
        )
        assert all(recover_group_key(solution, registry.get(g)) == beta for g in members)
        assert not 0 < recover_group_key(solution, registry.get(outsider)) < order


def test_removed_member_never_recovers(world):
    """After revoke_member the removed primes stop recovering while the rest still agree."""
    gp, rng = world.gp, world.rng
    dcc = DataCommunicationCompany(gp.provider)
    gids = [f"meter-{i}" for i in range(6)]
    primes = {gid: dcc.register(gid, rng) for gid in gids}
    for gid in gids:
        dcc.grant("vendorA.dlc", gid)
    text = signcrypt(gp, b"m", "vendorA.s AND vendorA.dlc", world.signers["vendorA"],
                     world.publics, rng)
    x = text.policy.delta.index("vendorA.dlc")

    removed = []
    for gid in gids[:3]:
        assert dcc.revoke_member("vendorA.dlc", gid)
        removed.append(gid)
        kept = [g for g in gids if g not in removed]
        for _ in range(20):
            broadcast = dcc.revoke(text, rng)
            solution = broadcast.crt_solutions[x]
            recovered = {recover_group_key(solution, primes[g]) for g in kept}
            assert len(recovered) == 1
            beta = recovered.pop()
            assert 0 < beta < gp.order
            assert broadcast.rows[x].c2 == text.rows[x].c2 ** beta
            for gone in removed:
                assert not 0 < recover_group_key(solution, primes[gone]) < gp.order


def test_access_list_table():
    """Members must be registered; removal reports membership."""
    registry = PrimeRegistry(mask_width=3, extra_bits=2)
    registry.assign("a", random.Random(0))
    table = AccessListTable(registry)
    with pytest.raises(RegistryError):
        table.add("x", "ghost")
    table.add("x", "a")
    assert table.members("x") == {"a"}
    assert table.attributes_of("a") == ["x"]
    assert table.remove("x", "a") is True
    assert table.remove("x", "a") is False
    assert table.members("unknown") == frozenset()


def test_revoke_leaves_signer_row(world):
    """Only attribute rows are re-blinded; an empty list publishes B=0."""
    gp, rng = world.gp, world.rng
    registry = PrimeRegistry.for_order(gp.order)
    q = registry.assign("meter-1", rng)
    table = AccessListTable(registry, {"vendorA.dlc": ["meter-1"]})
    text = signcrypt(gp, b"m", "vendorA.s AND vendorA.dlc AND vendorA.fw",
                     world.signers["vendorA"], world.publics, rng)
    revoked = revoke(gp.provider, text, registry, table, rng)
    assert revoked.crt_solutions[0] is None
    assert revoked.crt_solutions[2] == 0
    beta = recover_group_key(revoked.crt_solutions[1], q)
    assert 0 < beta < gp.order
    assert revoked.rows[1].c2 == text.rows[1].c2 ** beta
    assert revoked.rows[1].c1 == text.rows[1].c1
    assert revoked.header == text.header and revoked.payload == text.payload
    with pytest.raises(ValueError):
        revoke(gp.provider, revoked, registry, table, rng)


def test_revoke_missing_list_is_empty(world):
    """An attribute without any access list behaves as an empty one."""
    gp, rng = world.gp, world.rng
    registry = PrimeRegistry.for_order(gp.order)
    text = signcrypt(gp, b"m", "vendorA.s AND vendorA.dlc", world.signers["vendorA"],
                     world.publics, rng)
    revoked = revoke(gp.provider, text, registry, AccessListTable(registry), rng)
    assert revoked.crt_solutions == (None, 0)


def test_dcc_persistence(tmp_path):
    """Registry and access lists survive a save/load cycle."""
    provider = MockProvider(seed=0, order=1009)
    dcc = DataCommunicationCompany(provider)
    rng = random.Random(4)
    q = dcc.register("meter-1", rng)
    dcc.grant("vendorA.dlc", "meter-1")
    dcc.table.ensure("vendorA.fw")
    dcc.save(tmp_path)
    registry_doc = json.loads((tmp_path / "registry.json").read_text())
    assert registry_doc == {"meter-1": format(q, "x")}
    loaded = DataCommunicationCompany.load(tmp_path, provider)
    assert loaded.registry.get("meter-1") == q
    assert loaded.table.to_document() == {"vendorA.dlc": ["meter-1"], "vendorA.fw": []}


def test_dcc_load_missing_and_corrupt(tmp_path):
    """Missing files give empty state; corrupt files are encoding errors."""
    assert len(load_registry(tmp_path / "nope.json", 1009)) == 0
    registry = PrimeRegistry.for_order(1009)
    assert load_access_lists(tmp_path / "nope.json", registry).attributes() == []
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(EncodingError):
        load_registry(tmp_path / "bad.json", 1009)
    (tmp_path / "bad_hex.json").write_text('{"m": "zz"}')
    with pytest.raises(EncodingError):
        load_registry(tmp_path / "bad_hex.json", 1009)
