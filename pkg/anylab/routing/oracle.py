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

"""Exhaustive route computation for small topologies.

The oracle shares nothing with the propagation engine but the
preference and export rules.  For every AS it lists each simple path
toward an announcing AS that the business rules, the communities and
poisoning permit.  It then picks, for every AS, the best path whose
tail is the path the next hop itself picked, until no choice changes.

It enumerates every simple path, so keep it to topologies of a dozen
ASes at most.

"""

from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx

from anylab.routing.announcement import Announcement, check_announcement
from anylab.routing.rib import LOCAL_PREF, ORIGIN_PREF, RibEntry, RibSet
from anylab.topology.types import AsTopology, Role


def brute_force_rib(
    topology: AsTopology, announcements: Iterable[Announcement]
) -> RibSet:
    """Compute the converged routes by exhaustive enumeration.

    Args:
        topology (AsTopology): a small topology.
        announcements (iterable of Announcement): the originations.

    Returns:
        rib (RibSet): equal to what `propagate` returns.

    """
    announcements = sorted(
        set(announcements), key=lambda announcement: announcement.sort_key
    )
    by_prefix = {}
    for announcement in announcements:
        check_announcement(topology, announcement)
        host = topology.site(announcement.site_id).host_asn
        by_prefix.setdefault(announcement.prefix, {})[host] = announcement

    entries = {}
    for prefix in sorted(by_prefix):
        chosen = _stable_choice(topology, by_prefix[prefix])
        for asn in sorted(chosen):
            hops = chosen[asn]
            entries[(asn, prefix)] = _entry(
                topology, prefix, hops, by_prefix[prefix]
            )

    return RibSet(entries=entries, announcements=tuple(announcements))


def permitted_paths(
    topology: AsTopology, asn: int, origins: Dict[int, Announcement]
) -> List[Tuple[int, ...]]:
    """List the hop sequences `asn` could use toward an origin.

    Each sequence starts with `asn` and ends with an origin.

    """
    if asn in origins:
        return [(asn,)]

    found = []
    for origin in sorted(origins):
        for hops in nx.all_simple_paths(topology.graph, asn, origin):
            hops = tuple(hops)
            if _permitted(topology, hops, origins):
                found.append(hops)

    return found


def as_path(
    topology: AsTopology,
    hops: Tuple[int, ...],
    origins: Dict[int, Announcement],
) -> Tuple[int, ...]:
    """Return the AS path the first hop receives along `hops`."""
    origin = hops[-1]
    announcement = origins[origin]
    path = list(announcement.announced_path(origin))
    # Walk back from the origin, each exporter prepending itself.
    for index in range(len(hops) - 2, 0, -1):
        sender = hops[index]
        copies = 1
        if index == len(hops) - 2:
            receiver = hops[index - 1]
            copies += sum(
                community.extra_prepend(receiver)
                for community in announcement.communities
            )
        path = [sender] * copies + path

    return tuple(path)


def _permitted(topology, hops, origins) -> bool:
    # An origin never imports routes toward its own prefix.
    if any(hop in origins for hop in hops[:-1]):
        return False

    announcement = origins[hops[-1]]
    if any(hop in announcement.poisoned_asns for hop in hops[:-1]):
        return False

    for index in range(1, len(hops) - 1):
        exporter = hops[index]
        learned = topology.role(exporter, hops[index + 1])
        toward = topology.role(exporter, hops[index - 1])
        if learned is not Role.CUSTOMER and toward is not Role.CUSTOMER:
            return False

        if index == len(hops) - 2:
            for community in announcement.communities:
                if not community.permits(hops[index - 1], toward):
                    return False

    return True


def _rank(topology, hops, origins):
    local_pref = LOCAL_PREF[topology.role(hops[0], hops[1])]
    return (-local_pref, len(as_path(topology, hops, origins)), hops[1])


def _stable_choice(topology, origins) -> Dict[int, Tuple[int, ...]]:
    candidates = {
        asn: permitted_paths(topology, asn, origins)
        for asn in sorted(topology.node_index)
    }
    chosen: Dict[int, Optional[Tuple[int, ...]]] = {
        asn: (asn,) for asn in origins
    }

    limit = max(1, len(candidates) ** 2)
    for _ in range(limit):
        stable = True
        for asn in sorted(candidates):
            if asn in origins:
                continue

            usable = [
                hops
                for hops in candidates[asn]
                if chosen.get(hops[1]) == hops[1:]
            ]
            pick = None
            if usable:
                pick = min(
                    usable, key=lambda hops: _rank(topology, hops, origins)
                )
            if chosen.get(asn) != pick:
                stable = False
                chosen[asn] = pick

        if stable:
            break
    else:
        raise RuntimeError("exhaustive route choice did not settle")

    return {asn: hops for asn, hops in chosen.items() if hops is not None}


def _entry(topology, prefix, hops, origins) -> RibEntry:
    origin = hops[-1]
    site_id = topology.site_by_asn[origin].site_id
    if len(hops) == 1:
        return RibEntry(
            asn=origin,
            prefix=prefix,
            origin_site_id=site_id,
            local_pref=ORIGIN_PREF,
        )

    role = topology.role(hops[0], hops[1])
    return RibEntry(
        asn=hops[0],
        prefix=prefix,
        as_path=as_path(topology, hops, origins),
        next_hop_asn=hops[1],
        origin_site_id=site_id,
        local_pref=LOCAL_PREF[role],
        learned_from=role,
    )
