"""Line-oriented scenario scripts for the grid simulator.

::

    # actors first
    DNO dnoA region1 region2
    VENDOR vendorA dlc fw
    REGISTER meter1
    GRANT meter1 vendorA.dlc
    REVOKE meter1 vendorA.dlc
    PUBLISH vendorA hello vendorA.s AND vendorA.dlc

Bare attribute names in actor lines are qualified as ``<actor>.<name>``.
The PUBLISH payload token is used verbatim as UTF-8 bytes; the rest of the
line is the policy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Tuple, Union

from .errors import MabsError, ScenarioError
from .models import DownlinkEvent
from .simulator import DNO, VENDOR, GridSimulator

logger = logging.getLogger(__name__)

_ARITY = {
    DNO: (1, None),
    VENDOR: (1, None),
    "REGISTER": (1, 1),
    "GRANT": (2, 2),
    "REVOKE": (2, 2),
    "PUBLISH": (3, None),
}


@dataclass(frozen=True)
class Command:
    lineno: int
    verb: str
    args: Tuple[str, ...]


def parse_scenario(text: str) -> List[Command]:
    commands: List[Command] = []
    seen_other = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        verb, *args = line.split()
        verb = verb.upper()
        if verb not in _ARITY:
            raise ScenarioError(lineno, f"unknown command {verb!r}")
        low, high = _ARITY[verb]
        if len(args) < low or (high is not None and len(args) > high):
            expected = str(low) if low == high else f"at least {low}"
            raise ScenarioError(lineno, f"{verb} takes {expected} arguments")
        if verb in (DNO, VENDOR):
            if seen_other:
                raise ScenarioError(lineno, "actor declarations must precede all other commands")
        else:
            seen_other = True
        commands.append(Command(lineno, verb, tuple(args)))
    return commands


def run_commands(sim: GridSimulator, commands: Iterable[Command]) -> List[DownlinkEvent]:
    events: List[DownlinkEvent] = []
    for cmd in commands:
        try:
            if cmd.verb in (DNO, VENDOR):
                sim.declare_actor(cmd.verb, cmd.args[0], cmd.args[1:])
            elif cmd.verb == "REGISTER":
                sim.register_user(cmd.args[0])
            elif cmd.verb == "GRANT":
                sim.grant_attribute(*cmd.args)
            elif cmd.verb == "REVOKE":
                sim.revoke_attribute(*cmd.args)
            else:
                sender, payload, *policy = cmd.args
                event = sim.publish_multicast(sender, " ".join(policy), payload.encode("utf-8"))
                events.append(event)
        except ScenarioError:
            raise
        except MabsError as exc:
            raise ScenarioError(cmd.lineno, str(exc)) from exc
    logger.info(f"Scenario finished with {len(events)} multicasts")
    return events


def run_scenario(sim: GridSimulator, script: Union[str, Path]) -> List[DownlinkEvent]:
    """Replay a script file against ``sim`` and return its event log."""
    return run_commands(sim, parse_scenario(Path(script).read_text(encoding="utf-8")))


def events_to_jsonl(events: Iterable[DownlinkEvent]) -> str:
    return "".join(event.model_dump_json() + "\n" for event in events)
