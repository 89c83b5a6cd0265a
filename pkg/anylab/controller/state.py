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

"""Control state: the active announcements of every site.

The control state is the simulated counterpart of a testbed's
management tool.  Operators announce a prefix at a site (possibly
with prepending, poisoning and communities), withdraw it, or apply
reverse prepending across sites.  Every command, successful or not,
is appended to the command log with a logical timestamp, in the text
form scenario files use, so that the log can be replayed.

When a storage engine is given, the state writes through to it: the
stored announcements and log always match the state in memory.

"""

import ipaddress
import logging
from typing import Dict, Iterable, List, Optional, Tuple, Union

from anylab.errors import AnylabError, PrefixError
from anylab.model import Model
from anylab.routing.announcement import Announcement, check_announcement
from anylab.routing.community import Community
from anylab.routing.engine import propagate
from anylab.routing.rib import RibSet
from anylab.storage.abc import AbstractStorageEngine
from anylab.topology.types import AsTopology, Role

logger = logging.getLogger(__name__)

OK = "ok"
NO_OP = "no-op"

Key = Tuple[str, str]


class LogEntry(Model):

    """A command log entry."""

    time: int
    command: str
    outcome: str

    @property
    def failed(self) -> bool:
        return self.outcome.startswith("error")


class ControlState:

    """The announcements currently active, and how they came to be.

    Args:
        topology (AsTopology): the topology sites live in.
        storage (AbstractStorageEngine, optional): where to write
                through.  Its announcements and log are loaded first.
        workers (int): workers used when propagating routes.

    """

    def __init__(
        self,
        topology: AsTopology,
        storage: Optional[AbstractStorageEngine] = None,
        workers: int = 1,
    ):
        self.topology = topology
        self.storage = storage
        self.workers = workers
        self.announcements: Dict[Key, Announcement] = {}
        self.log: List[LogEntry] = []

        if storage is not None:
            for announcement in storage.load_announcements():
                check_announcement(topology, announcement)
                key = (announcement.site_id, announcement.prefix)
                self.announcements[key] = announcement
            self.log = [
                LogEntry(time=time, command=command, outcome=outcome)
                for time, command, outcome in storage.load_log()
            ]

    def __repr__(self):
        return (
            f"<ControlState {len(self.announcements)} announcements, "
            f"{len(self.log)} log entries>"
        )

    @property
    def clock(self) -> int:
        """Return the logical time of the last logged command."""
        return self.log[-1].time if self.log else 0

    def snapshot(self) -> Tuple[Announcement, ...]:
        """Return the active announcements, by site then prefix."""
        return tuple(
            self.announcements[key] for key in sorted(self.announcements)
        )

    def announcing_sites(self, prefix: str) -> List[str]:
        return sorted(
            site_id
            for site_id, announced in self.announcements
            if announced == prefix
        )

    def rib(self) -> RibSet:
        """Propagate the active announcements."""
        return propagate(
            self.topology, self.snapshot(), workers=self.workers
        )

    def announce(
        self,
        site_id: str,
        prefix: str,
        family: Optional[int] = None,
        prepend: int = 0,
        communities: Iterable[Union[Community, str]] = (),
        poison: Iterable[int] = (),
        time: Optional[int] = None,
    ) -> "ControlState":
        """Announce a prefix at a site.

        Any announcement of the same prefix at the same site is
        replaced.

        Args:
            site_id (str): the announcing site.
            prefix (str): the prefix, within a declared anycast prefix.
            family (int, optional): 4 or 6, checked against the prefix.
            prepend (int): how many times the origin prepends itself.
            communities (iterable): communities, or their text form.
            poison (iterable of int): AS numbers to poison.
            time (int, optional): logical time, the next tick if unset.

        Returns:
            state (ControlState): this state, updated.

        Raises:
            UnknownSiteError: the site does not exist.
            PrefixError: the prefix is malformed, of the wrong family
                    or outside the anycast space.
            CapabilityError: the site does not support a community.

        """
        communities = list(communities)
        poison = sorted(set(poison))
        words = ["announce", site_id, prefix, f"prepend={prepend}"]
        if communities:
            names = sorted(str(community) for community in communities)
            words.append("community=" + ",".join(names))
        if poison:
            words.append("poison=" + ",".join(str(asn) for asn in poison))
        command = " ".join(words)

        with self._logged(command, time):
            self.topology.site(site_id)
            if prepend < 0:
                raise AnylabError(f"prepend must be >= 0, got {prepend}")

            try:
                parsed = frozenset(
                    item
                    if isinstance(item, Community)
                    else Community.parse(item)
                    for item in communities
                )
            except ValueError as err:
                raise AnylabError(str(err).splitlines()[-1].strip())

            announcement = Announcement(
                site_id=site_id,
                prefix=_normalize(prefix),
                origin_prepend=prepend,
                poisoned_asns=frozenset(poison),
                communities=parsed,
            )
            if family is not None and announcement.family != family:
                raise PrefixError(
                    f"{announcement.prefix} is not an IPv{family} prefix"
                )
            check_announcement(self.topology, announcement)
            self.announcements[(site_id, announcement.prefix)] = announcement
            if self.storage is not None:
                self.storage.save_announcement(announcement)

        return self

    def withdraw(
        self, site_id: str, prefix: str, time: Optional[int] = None
    ) -> "ControlState":
        """Withdraw a prefix from a site.

        Withdrawing a prefix the site does not announce changes
        nothing, but is logged as a no-op.

        Raises:
            UnknownSiteError: the site does not exist.
            PrefixError: the prefix is malformed.

        """
        command = f"withdraw {site_id} {prefix}"
        with self._logged(command, time) as entry:
            self.topology.site(site_id)
            key = (site_id, _normalize(prefix))
            if key not in self.announcements:
                entry["outcome"] = NO_OP
            else:
                del self.announcements[key]
                if self.storage is not None:
                    self.storage.delete_announcement(*key)

        return self

    def reverse_prepend(
        self, prefix: str, keep_site: str, n: int, time: Optional[int] = None
    ) -> "ControlState":
        """Prepend n more times at every announcing site but one.

        Args:
            prefix (str): the announced prefix.
            keep_site (str): the site left untouched.
            n (int): the extra prepending, at least 1.

        Raises:
            UnknownSiteError: `keep_site` does not exist.
            PrefixError: `keep_site` does not announce the prefix, or
                    is its only announcer.

        """
        command = f"reverse-prepend {prefix} keep={keep_site} n={n}"
        with self._logged(command, time):
            self.topology.site(keep_site)
            prefix = _normalize(prefix)
            if n < 1:
                raise PrefixError(f"reverse prepending needs n >= 1, got {n}")

            sites = self.announcing_sites(prefix)
            if keep_site not in sites:
                raise PrefixError(
                    f"site {keep_site} does not announce {prefix}"
                )
            if len(sites) < 2:
                raise PrefixError(
                    f"site {keep_site} is the only site announcing {prefix}"
                )

            for site_id in sites:
                if site_id == keep_site:
                    continue

                key = (site_id, prefix)
                current = self.announcements[key]
                updated = current.copy(
                    update={"origin_prepend": current.origin_prepend + n}
                )
                self.announcements[key] = updated
                if self.storage is not None:
                    self.storage.save_announcement(updated)

        return self

    def status(self) -> str:
        """Describe every site, its announcements and export verdicts.

        Verdicts come from a propagation run: for each neighbor of the
        announcing AS, whether it selected the site's route, preferred
        another one or rejected it because it is poisoned.  A neighbor
        that selected it but withholds it from some of its own neighbors
        because of a community is reported as filtered.

        """
        lines = ["anylab control status (export verdicts are simulated)"]
        if not self.announcements:
            lines.append("no active announcements")
            return "\n".join(lines) + "\n"

        rib = self.rib()
        by_site = {}
        for announcement in self.snapshot():
            by_site.setdefault(announcement.site_id, []).append(announcement)

        for site in sorted(self.topology.sites, key=lambda s: s.site_id):
            capabilities = ",".join(
                sorted(policy.value for policy in site.te_capabilities)
            )
            lines.append(
                f"site {site.site_id} AS{site.host_asn} "
                f"capabilities={capabilities}"
            )
            announced = by_site.get(site.site_id, [])
            if not announced:
                lines.append("  no active announcements")
                continue

            for announcement in announced:
                lines.append(f"  {announcement.describe()}")
                for neighbor in self.topology.neighbors(site.host_asn):
                    verdict = _verdict(
                        self.topology, rib, site, announcement, neighbor.asn
                    )
                    lines.append(
                        f"    AS{neighbor.asn} ({neighbor.role.value}): "
                        f"{verdict}"
                    )

        return "\n".join(lines) + "\n"

    def _logged(self, command: str, time: Optional[int]):
        return _LogContext(self, command, time)

    def _append(self, time: int, command: str, outcome: str):
        entry = LogEntry(time=time, command=command, outcome=outcome)
        self.log.append(entry)
        if self.storage is not None:
            self.storage.append_log(time, command, outcome)
        logger.info("t=%d %s -> %s", time, command, outcome)


class _LogContext:

    """Log a command once it completed or failed."""

    def __init__(self, state, command, time):
        self.state = state
        self.command = command
        self.time = state.clock + 1 if time is None else time
        self.entry = {"outcome": OK}

    def __enter__(self):
        return self.entry

    def __exit__(self, exc_type, exc_value, traceback):
        if exc_type is None:
            outcome = self.entry["outcome"]
        elif issubclass(exc_type, AnylabError):
            outcome = f"error: {exc_value}"
        else:
            return False

        self.state._append(self.time, self.command, outcome)
        return False


def _normalize(prefix: str) -> str:
    try:
        return str(ipaddress.ip_network(prefix, strict=True))
    except ValueError as err:
        raise PrefixError(f"malformed prefix {prefix!r}: {err}")


def _verdict(topology, rib, site, announcement, neighbor: int) -> str:
    if neighbor in announcement.poisoned_asns:
        return "rejected (poisoned)"

    entry = rib.get(neighbor, announcement.prefix)
    if entry is None:
        return "no route"
    if entry.next_hop_asn == site.host_asn:
        return _filtered(topology, entry, announcement) or "selected"
    if entry.is_origin:
        return "originates it"
    return f"prefers AS{entry.next_hop_asn} (site {entry.origin_site_id})"


def _filtered(topology, entry, announcement) -> Optional[str]:
    """Describe the exports of an upstream blocked by communities."""
    exports = [
        other
        for other in topology.neighbors(entry.asn)
        if other.asn != entry.next_hop_asn
        and (
            entry.learned_from is Role.CUSTOMER
            or other.role is Role.CUSTOMER
        )
    ]
    names = set()
    blocked = 0
    for other in exports:
        denying = [
            str(community)
            for community in announcement.communities
            if not community.permits(other.asn, other.role)
        ]
        if denying:
            names.update(denying)
            blocked += 1

    if not blocked:
        return None

    return (
        f"selected, filtered ({','.join(sorted(names))}) "
        f"toward {blocked} of {len(exports)} neighbors"
    )
