"""End-to-end runs of the ``mabs`` command line on the mock provider."""

import json

import pytest

from mabs.cli import main

SCRIPT = """\
VENDOR vA dlc
REGISTER m1
GRANT m1 vA.dlc
PUBLISH vA hello vA.s AND vA.dlc
"""


def run(*argv):
    return main(["--provider", "mock", *[str(a) for a in argv]])


@pytest.fixture
def deployment(tmp_path):
    """One vendor, two registered meters, only m1 subscribed to vA.dlc."""
    gp = tmp_path / "gp.json"
    state = tmp_path / "dcc"
    assert run("setup", "--authority", "vA=dlc,fw", "--signer", "vA", "--out", gp) == 0
    assert run("authority-keygen", "--gp", gp, "--authority", "vA",
               "--public", tmp_path / "pk.json", "--out", tmp_path / "sk.json") == 0
    assert run("signer-keygen", "--gp", gp, "--signer", "vA",
               "--out", tmp_path / "signer.json") == 0
    for gid in ("m1", "m2"):
        ring = tmp_path / f"{gid}.json"
        assert run("register", "--gp", gp, "--state", state, "--gid", gid, "--out", ring) == 0
        assert run("verkey", "--gp", gp, "--keys", tmp_path / "signer.json",
                   "--gid", gid, "--out", ring) == 0
    assert run("deckey", "--gp", gp, "--keys", tmp_path / "sk.json", "--gid", "m1",
               "--attribute", "dlc", "--out", tmp_path / "m1.json") == 0
    assert run("grant", "--gp", gp, "--state", state, "--gid", "m1",
               "--attribute", "vA.dlc") == 0
    (tmp_path / "fw.bin").write_bytes(b"\x7fELF firmware")
    return tmp_path


def _signcrypt_and_revoke(path):
    gp = path / "gp.json"
    assert run("signcrypt", "--gp", gp, "--policy", "vA.s AND vA.dlc",
               "--keys", path / "signer.json", "--public", path / "pk.json",
               "--in", path / "fw.bin", "--out", path / "fw.st") == 0
    assert run("revoke", "--gp", gp, "--state", path / "dcc",
               "--in", path / "fw.st", "--out", path / "fw.rv") == 0


def test_setup_writes_global_parameters(deployment):
    """The parameters file lists the universes and T."""
    doc = json.loads((deployment / "gp.json").read_text())
    assert doc["attributes"] == ["vA.dlc", "vA.fw"]
    assert doc["identity_attributes"] == ["vA.s"]
    assert doc["controller_map"]["vA.s"] == "vA"
    assert json.loads((deployment / "dcc" / "access_lists.json").read_text()) == {
        "vA.dlc": ["m1"]
    }


def test_subscriber_roundtrip(deployment):
    """signcrypt, revoke, designcrypt returns the original bytes."""
    _signcrypt_and_revoke(deployment)
    assert run("designcrypt", "--gp", deployment / "gp.json", "--keys", deployment / "m1.json",
               "--in", deployment / "fw.rv", "--out", deployment / "out.bin") == 0
    assert (deployment / "out.bin").read_bytes() == b"\x7fELF firmware"


def test_non_subscriber_exit_code(deployment, capsys):
    """A meter without the attribute exits with 2 and UNSATISFIED."""
    _signcrypt_and_revoke(deployment)
    capsys.readouterr()
    code = run("designcrypt", "--gp", deployment / "gp.json", "--keys", deployment / "m2.json",
               "--in", deployment / "fw.rv", "--out", deployment / "out.bin")
    assert code == 2
    assert capsys.readouterr().err.strip().splitlines()[-1] == "UNSATISFIED"


def test_revoked_subscriber_exit_code(deployment, capsys):
    """After removal from the access list the old key fails authentication."""
    assert run("grant", "--gp", deployment / "gp.json", "--state", deployment / "dcc",
               "--gid", "m1", "--attribute", "vA.dlc", "--remove") == 0
    _signcrypt_and_revoke(deployment)
    capsys.readouterr()
    code = run("designcrypt", "--gp", deployment / "gp.json", "--keys", deployment / "m1.json",
               "--in", deployment / "fw.rv")
    assert code == 2
    assert capsys.readouterr().err.strip().splitlines()[-1] == "AUTH_FAIL"


def test_usage_errors_exit_1(tmp_path):
    """Unknown commands, missing flags and bad files exit with 1."""
    assert run("nonsense") == 1
    assert run("designcrypt", "--gp", tmp_path / "gp.json") == 1
    assert run("setup", "--authority", "novalue", "--out", tmp_path / "gp.json") == 1
    assert run("signer-keygen", "--gp", tmp_path / "missing.json", "--signer", "x",
               "--out", tmp_path / "k.json") == 1


def test_env_seed_overrides_flag(tmp_path, monkeypatch):
    """MABS_SEED wins over --seed, giving identical keys."""
    gp = tmp_path / "gp.json"
    assert run("setup", "--authority", "vA=dlc", "--signer", "vA", "--out", gp) == 0
    monkeypatch.setenv("MABS_SEED", "5")
    assert run("--seed", "1", "signer-keygen", "--gp", gp, "--signer", "vA",
               "--out", tmp_path / "a.json") == 0
    assert run("--seed", "2", "signer-keygen", "--gp", gp, "--signer", "vA",
               "--out", tmp_path / "b.json") == 0
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()


def test_sim_run(tmp_path):
    """The simulator subcommand writes one JSON line per multicast."""
    script = tmp_path / "grid.txt"
    script.write_text(SCRIPT)
    out = tmp_path / "events.jsonl"
    assert run("--seed", "3", "sim", "run", script, "--out", out) == 0
    events = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(events) == 1
    assert events[0]["outcomes"] == {"m1": "DELIVERED"}


def test_bench_refuses_mock_without_flag():
    """Timing the transparent provider needs --allow-mock."""
    assert run("bench", "revoke", "--users", "10") == 1


@pytest.mark.parametrize(
    "suite, flag",
    [("revoke", "--sizes"), ("signcrypt", "--users"), ("designcrypt", "--sizes")],
)
def test_bench_rejects_another_suites_flag(suite, flag, capsys):
    """Each suite sweeps its own parameter."""
    assert run("bench", suite, flag, "5", "--allow-mock") == 1
    assert "bench " + suite + " takes" in capsys.readouterr().err


def test_bench_csv(monkeypatch, capsys):
    """bench revoke --users 250 reports one CSV row for 250 users."""
    monkeypatch.setenv("MABS_BENCH_MIN_ITERATIONS", "1")
    capsys.readouterr()
    assert run("bench", "revoke", "--users", "250", "--iterations", "2", "--allow-mock") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "suite,param,mean_ms,std_ms,n"
    assert lines[1].startswith("revoke,250,") and lines[1].endswith(",2")
