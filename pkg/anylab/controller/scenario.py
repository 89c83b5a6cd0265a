# Copyright (c) 2022, Anylab developers
# All rights reserved.

# Redistribution and use in source and binary forms, with or without
# modification, are permitted provided that the following conditions are met:

# 1. Redistributions of source code must retain the above copyright notice,
#    this list of conditions and the following disclaimer.

# 2. Redistributions in binary form must reproduce the above copyright notice,
#    this list of conditions and the following disclaimer in the documentation
#    and/or other materials provided with the distribution.

# 3. Neither the name of the copyright holder nor the names of its
#    contributors may be used to endorse or promote products derived from
#    this software without specific prior written permission.

# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS"
# AND ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE
# IMPLIED WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE
# ARE DISCLAIMED. IN NO EVENT SHALL THE COPYRIGHT HOLDER OR CONTRIBUTORS
# BE LIABLE FOR ANY DIRECT, INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY,
# OR CONSEQUENTIAL DAMAGES (INCLUDING, BUT NOT LIMITED TO, PROCUREMENT OF
# SUBSTITUTE GOODS OR SERVICES; LOSS OF USE, DATA, OR PROFITS; OR BUSINESS
# INTERRUPTION) HOWEVER CAUSED AND ON ANY THEORY OF LIABILITY, WHETHER IN
# CONTRACT, STRICT LIABILITY, OR TORT (INCLUDING NEGLIGENCE OR OTHERWISE)
# ARISING IN ANY WAY OUT OF THE USE OF THIS SOFTWARE, EVEN IF ADVISED
# OF THE POSSIBILITY OF SUCH DAMAGE.

"""Scenario scripts: timed controller commands.

A scenario holds one command per line, prefixed by its logical time:

```
# two experiments on the halves of the /23
1 announce br-poa 145.100.118.0/24 prepend=2 community=noPeer
1 announce us-los 145.100.119.0/24
5 reverse-prepend 145.100.118.0/24 keep=br-poa n=3
9 withdraw br-poa 145.100.118.0/24
```

Commands are applied in time order (commands sharing a time keep the
script order) and the routes are propagated after each of them.

"""

import logging
from typing import List, NamedTuple, Optional, Tuple

from anylab.controller.state import ControlState, LogEntry
from anylab.errors import AnylabError, ScenarioError
from anylab.model import Model
from anylab.routing.rib import RibSet
from anylab.topology.types import AsTopology

logger = logging.getLogger(__name__)

ANNOUNCE_OPTIONS = {"prepend", "community", "poison"}


class Command(Model):

    """A parsed scenario command."""

    time: int
    action: str
    site_id: Optional[str] = None
    prefix: str
    prepend: int = 0
    communities: Tuple[str, ...] = ()
    poison: Tuple[int, ...] = ()
    keep_site: Optional[str] = None
    n: int = 0

    def apply(self, state: ControlState) -> ControlState:
        """Apply the command to a control state."""
        if self.action == "announce":
            return state.announce(
                self.site_id,
                self.prefix,
                prepend=self.prepend,
                communities=self.communities,
                poison=self.poison,
                time=self.time,
            )
        if self.action == "withdraw":
            return state.withdraw(self.site_id, self.prefix, time=self.time)
        return state.reverse_prepend(
            self.prefix, self.keep_site, self.n, time=self.time
        )


class ScenarioResult(NamedTuple):

    """The outcome of a scenario run."""

    state: ControlState
    snapshots: List[RibSet]


def parse_command(line: str) -> Command:
    """Parse one scenario line.

    Raises:
        ValueError: the line is not a valid command.

    """
    words = line.split()
    if len(words) < 3:
        raise ValueError(f"incomplete command: {line.strip()!r}")

    try:
        time = int(words[0])
    except ValueError:
        raise ValueError(f"expected a logical time, got {words[0]!r}")

    action = words[1]
    if action == "announce":
        if len(words) < 4:
            raise ValueError("usage: <t> announce <site> <prefix> [options]")
        options = _options(words[4:], ANNOUNCE_OPTIONS)
        communities = ()
        if "community" in options:
            communities = tuple(options["community"].split(","))
        poison = ()
        if "poison" in options:
            poison = tuple(
                _integer(asn, "poison") for asn in options["poison"].split(",")
            )
        return Command(
            time=time,
            action=action,
            site_id=words[2],
            prefix=words[3],
            prepend=_integer(options.get("prepend", "0"), "prepend"),
            communities=communities,
            poison=poison,
        )

    if action == "withdraw":
        if len(words) != 4:
            raise ValueError("usage: <t> withdraw <site> <prefix>")
        return Command(
            time=time, action=action, site_id=words[2], prefix=words[3]
        )

    if action == "reverse-prepend":
        options = _options(words[3:], {"keep", "n"})
        if set(options) != {"keep", "n"}:
            raise ValueError(
                "usage: <t> reverse-prepend <prefix> keep=<site> n=<k>"
            )
        return Command(
            time=time,
            action=action,
            prefix=words[2],
            keep_site=options["keep"],
            n=_integer(options["n"], "n"),
        )

    raise ValueError(f"unknown command {action!r}")


def parse_scenario(script: str) -> List[Command]:
    """Parse a scenario script.

    Raises:
        ScenarioError: a command is malformed.  Its index is the
                1-based position of the command in the script.

    """
    commands = []
    for line in script.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue

        try:
            commands.append(parse_command(line))
        except ValueError as err:
            raise ScenarioError(len(commands) + 1, str(err))

    return commands


def run_scenario(state: ControlState, script) -> ScenarioResult:
    """Apply a scenario to a control state.

    Args:
        state (ControlState): the state to update.
        script (str or list of Command): the scenario.

    Returns:
        result (ScenarioResult): the final state and the routes
                propagated after each command.

    Raises:
        ScenarioError: a command failed.  The error holds the
                snapshots taken before the failure.

    """
    commands = parse_scenario(script) if isinstance(script, str) else script
    ordered = sorted(
        enumerate(commands, start=1), key=lambda item: item[1].time
    )

    snapshots = []
    for index, command in ordered:
        try:
            command.apply(state)
            snapshots.append(state.rib())
        except AnylabError as err:
            raise ScenarioError(index, str(err), snapshots, state)

        logger.debug("command %d applied at t=%d", index, command.time)

    return ScenarioResult(state, snapshots)


def replay(topology: AsTopology, log: List[LogEntry]) -> ControlState:
    """Rebuild a control state from its command log.

    Failed commands are replayed too, and fail again without changing
    anything.

    """
    state = ControlState(topology)
    for entry in log:
        command = parse_command(f"{entry.time} {entry.command}")
        try:
            command.apply(state)
        except AnylabError:
            if not entry.failed:
                raise

    return state


def _options(words, allowed):
    options = {}
    for word in words:
        key, sep, value = word.partition("=")
        if not sep or key not in allowed:
            raise ValueError(f"unexpected argument {word!r}")
        options[key] = value
    return options


def _integer(text: str, name: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{name} expects an integer, got {text!r}")
