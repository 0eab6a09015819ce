"""Scenario scripts."""

import json

import pytest

from mabs.errors import ScenarioError
from mabs.pairing import MockProvider
from mabs.scenario import events_to_jsonl, parse_scenario, run_commands, run_scenario
from mabs.simulator import GridSimulator

SCRIPT = """\
# two companies
DNO dnoA region1 region2
VENDOR vendorA dlc fw

REGISTER meter1
REGISTER meter2
GRANT meter1 vendorA.dlc
GRANT meter2 vendorA.dlc
PUBLISH vendorA tariff vendorA.s AND vendorA.dlc
REVOKE meter2 vendorA.dlc   # customer cancelled
PUBLISH vendorA tariff2 vendorA.s AND vendorA.dlc
"""


def _sim():
    return GridSimulator(MockProvider(seed=0, order=1009), seed=9)


def test_run_scenario(tmp_path):
    """The script replays into one event per PUBLISH."""
    path = tmp_path / "grid.txt"
    path.write_text(SCRIPT)
    events = run_scenario(_sim(), path)
    assert [e.delivered() for e in events] == [["meter1", "meter2"], ["meter1"]]
    assert events[1].outcomes["meter2"] == "AUTH_FAIL"
    assert all(e.oracle_agrees for e in events)


def test_event_log_is_byte_stable(tmp_path):
    """Same seed, same script, same JSONL."""
    first = events_to_jsonl(run_commands(_sim(), parse_scenario(SCRIPT)))
    second = events_to_jsonl(run_commands(_sim(), parse_scenario(SCRIPT)))
    assert first == second
    lines = first.splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["policy"] == "vendorA.s AND vendorA.dlc"


def test_parse_scenario_commands():
    """Verbs are case-insensitive; comments and blanks are skipped."""
    commands = parse_scenario("dno d r\n\n# c\nregister m1\npublish d hi d.s AND d.r\n")
    assert [c.verb for c in commands] == ["DNO", "REGISTER", "PUBLISH"]
    assert commands[2].args == ("d", "hi", "d.s", "AND", "d.r")
    assert commands[1].lineno == 4


@pytest.mark.parametrize(
    "script, lineno",
    [
        ("DNO d r\nFLY m1\n", 2),
        ("DNO d r\nREGISTER\n", 2),
        ("DNO d r\nGRANT m1\n", 2),
        ("DNO d r\nREGISTER m1\nVENDOR v x\n", 3),
        ("DNO d r\nPUBLISH d hi\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(script, lineno):
    """Malformed lines are reported with their line number."""
    with pytest.raises(ScenarioError) as info:
        parse_scenario(script)
    assert info.value.lineno == lineno


def test_runtime_errors_carry_line_numbers():
    """Errors raised while replaying point at the offending line."""
    commands = parse_scenario("DNO d r\nREGISTER m1\nGRANT m1 d.nope\n")
    with pytest.raises(ScenarioError) as info:
        run_commands(_sim(), commands)
    assert info.value.lineno == 3
