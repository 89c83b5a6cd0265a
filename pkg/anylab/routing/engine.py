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

"""Route propagation engine.

`propagate` computes, for every prefix, the route each AS selects once
the network has converged.  ASes follow the usual business rules:

* Preference: routes learned from customers (local_pref 200) beat
  routes learned from peers or over an IXP (100), which beat routes
  learned from providers (50).  Then the shortest AS path wins
  (prepended copies count), then the lowest next-hop AS number.
* Export: routes learned from customers, and the AS's own
  originations, go to every neighbor.  Routes learned from peers or
  providers only go to customers.
* Import: an AS rejects any path containing its own number.  This is
  what makes poisoning work.

Communities are honored by the upstreams that receive the route
straight from the announcing site.

Each prefix is computed independently, in synchronous rounds: in
every round, the neighbors of the ASes whose route changed during the
previous round recompute their choice from the previous round's
routes.  Since the outcome is the unique stable state, neither the
processing order nor the number of workers can change it.

"""

from concurrent.futures import ThreadPoolExecutor
import heapq
import ipaddress
import logging
from typing import Dict, Iterable, List, Optional, Tuple

from anylab.errors import NoRouteError, OscillationError
from anylab.routing.announcement import Announcement, check_announcement
from anylab.routing.rib import LOCAL_PREF, ORIGIN_PREF, RibEntry, RibSet
from anylab.topology.types import AsTopology, Role

logger = logging.getLogger(__name__)


class Origin:

    """An AS originating a prefix, as seen by the engine."""

    __slots__ = ("asn", "site_id", "path", "communities")

    def __init__(self, asn, site_id, path, communities=()):
        self.asn = asn
        self.site_id = site_id
        self.path = path
        self.communities = tuple(sorted(communities, key=str))


def propagate(
    topology: AsTopology,
    announcements: Iterable[Announcement],
    workers: int = 1,
) -> RibSet:
    """Propagate announcements and return the converged routes.

    Args:
        topology (AsTopology): the topology.
        announcements (iterable of Announcement): the originations.
                At most one per (site, prefix) is expected.
        workers (int): threads used to compute prefixes in parallel.
                The result never depends on it.

    Returns:
        rib (RibSet): one entry per (AS, prefix) holding a route.

    Raises:
        UnknownSiteError, PrefixError, CapabilityError: an announcement
                is not valid in this topology.
        OscillationError: propagation did not converge.

    """
    announcements = sorted(
        set(announcements), key=lambda announcement: announcement.sort_key
    )
    by_prefix = {}
    for announcement in announcements:
        check_announcement(topology, announcement)
        site = topology.site(announcement.site_id)
        by_prefix.setdefault(announcement.prefix, []).append(
            Origin(
                site.host_asn,
                site.site_id,
                announcement.announced_path(site.host_asn),
                announcement.communities,
            )
        )

    prefixes = sorted(by_prefix)

    def compute(prefix):
        return propagate_prefix(topology, prefix, by_prefix[prefix])

    if workers > 1 and len(prefixes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(compute, prefixes))
    else:
        results = [compute(prefix) for prefix in prefixes]

    entries = {}
    for prefix, routes in zip(prefixes, results):
        for asn in sorted(routes):
            entries[(asn, prefix)] = routes[asn]

    logger.debug(
        "propagated %d prefixes, %d routes", len(prefixes), len(entries)
    )
    return RibSet.construct(
        entries=entries, announcements=tuple(announcements)
    )


def propagate_prefix(
    topology: AsTopology, prefix: str, origins: List[Origin]
) -> Dict[int, RibEntry]:
    """Compute the converged routes toward one prefix.

    Args:
        topology (AsTopology): the topology.
        prefix (str): the prefix, copied into every entry.
        origins (list of Origin): the ASes announcing the prefix.

    Returns:
        routes (dict): AS number to its best route.

    """
    by_asn = {origin.asn: origin for origin in origins}
    best = {
        origin.asn: RibEntry.construct(
            asn=origin.asn,
            prefix=prefix,
            as_path=(),
            next_hop_asn=None,
            origin_site_id=origin.site_id,
            local_pref=ORIGIN_PREF,
            learned_from=None,
        )
        for origin in origins
    }

    bound = max(1, len(topology.node_index) ** 2)
    changed = set(best)
    rounds = 0
    while changed:
        rounds += 1
        if rounds > bound:
            raise OscillationError(prefix, bound)

        pending = set()
        for asn in changed:
            pending.update(nbr.asn for nbr in topology.neighbors(asn))
        pending -= by_asn.keys()

        current = dict(best)
        changed = set()
        for asn in sorted(pending):
            entry = select(topology, asn, prefix, best, by_asn)
            if entry != best.get(asn):
                changed.add(asn)
                if entry is None:
                    del current[asn]
                else:
                    current[asn] = entry
        best = current

    logger.debug("%s converged after %d rounds", prefix, rounds)
    return best


def select(
    topology: AsTopology,
    asn: int,
    prefix: str,
    routes: Dict[int, RibEntry],
    origins: Dict[int, Origin],
) -> Optional[RibEntry]:
    """Return the best route `asn` can build from its neighbors' routes.

    Args:
        topology (AsTopology): the topology.
        asn (int): the AS selecting a route.
        prefix (str): the prefix.
        routes (dict): the routes neighbors currently hold.
        origins (dict): the originating ASes.

    Returns:
        entry (RibEntry or None): the best route, if any.

    """
    chosen = None
    chosen_key = None
    for neighbor in topology.neighbors(asn):
        route = routes.get(neighbor.asn)
        if route is None:
            continue

        # The role `asn` plays for its neighbor decides the export.
        role = topology.role(neighbor.asn, asn)
        path = export(neighbor.asn, route, asn, role, origins)
        if path is None or asn in path:
            continue

        local_pref = LOCAL_PREF[neighbor.role]
        key = (-local_pref, len(path), neighbor.asn)
        if chosen_key is None or key < chosen_key:
            chosen_key = key
            chosen = (path, neighbor, route, local_pref)

    if chosen is None:
        return None

    path, neighbor, route, local_pref = chosen
    return RibEntry.construct(
        asn=asn,
        prefix=prefix,
        as_path=path,
        next_hop_asn=neighbor.asn,
        origin_site_id=route.origin_site_id,
        local_pref=local_pref,
        learned_from=neighbor.role,
    )


def export(
    sender: int,
    route: RibEntry,
    receiver: int,
    role: Role,
    origins: Dict[int, Origin],
) -> Optional[Tuple[int, ...]]:
    """Return the AS path `sender` advertises to `receiver`, if any.

    Args:
        sender (int): the exporting AS.
        route (RibEntry): the sender's best route.
        receiver (int): the neighbor receiving the route.
        role (Role): the role the receiver plays for the sender.
        origins (dict): the originating ASes.

    """
    if route.is_origin:
        return origins[sender].path

    if route.learned_from is not Role.CUSTOMER and role is not Role.CUSTOMER:
        return None

    extra = 0
    origin = origins.get(route.next_hop_asn)
    if origin is not None and origin.site_id == route.origin_site_id:
        for community in origin.communities:
            if not community.permits(receiver, role):
                return None
            extra += community.extra_prepend(receiver)

    return (sender,) * (1 + extra) + route.as_path


def catchment(rib: RibSet, prefix: str) -> Dict[int, str]:
    """Return the site each AS reaches for a prefix.

    When the prefix itself is not announced, every AS uses the most
    specific announced prefix covering it that it holds a route for.

    Args:
        rib (RibSet): the converged routes.
        prefix (str): the queried prefix.

    Returns:
        mapping (dict): AS number to site identifier.  ASes without a
                route are absent.

    """
    query = ipaddress.ip_network(prefix)
    covering = [
        announced
        for announced in rib.prefixes
        if _covers(ipaddress.ip_network(announced), query)
    ]

    mapping = {}
    for announced in reversed(covering):
        for asn, entry in rib.routes(announced).items():
            mapping[asn] = entry.origin_site_id

    return dict(sorted(mapping.items()))


def forward_path(rib: RibSet, from_asn: int, prefix: str) -> List[int]:
    """Follow next hops from an AS to the origin of a prefix.

    Returns:
        hops (list of int): the ASes traversed after `from_asn`,
                ending with the origin.  Empty when `from_asn` is the
                origin itself.

    Raises:
        NoRouteError: `from_asn` holds no route toward the prefix.

    """
    return _follow(rib.routes(prefix), from_asn, prefix)


def resolve(rib: RibSet, asn: int, address: str) -> Optional[RibEntry]:
    """Return the route `asn` uses for an address (longest match)."""
    target = ipaddress.ip_address(address)
    for prefix in rib.prefixes:
        network = ipaddress.ip_network(prefix)
        if network.version == target.version and target in network:
            entry = rib.get(asn, prefix)
            if entry is not None:
                return entry

    return None


def poisoned_reachability(
    topology: AsTopology, announcement: Announcement, workers: int = 1
) -> RibSet:
    """Propagate a poisoned announcement alone.

    Poisoned ASes find their own number in the received path and
    reject the route; everyone else treats it as ordinary path content.

    """
    return propagate(topology, [announcement], workers=workers)


def unicast_routes(topology: AsTopology, asn: int) -> Dict[int, RibEntry]:
    """Return every AS's route toward the address space of `asn`.

    The AS originates its own space with no prepending and no
    community, which gives the data-plane paths toward hosts in it.
    Without communities the stable routes are found in three passes
    instead of rounds: customer routes climb providers breadth first,
    peers of the ASes reached pick them up, and everyone else descends
    from providers by increasing path length.  The result is the one
    `propagate_prefix` converges to.

    """
    paths = {asn: ()}
    hops = {}

    frontier = [asn]
    while frontier:
        reached = {}
        for here in frontier:
            for nbr in topology.neighbors(here):
                if nbr.role is Role.PROVIDER and nbr.asn not in paths:
                    if nbr.asn not in reached or here < reached[nbr.asn]:
                        reached[nbr.asn] = here
        for there, via in reached.items():
            paths[there] = (via,) + paths[via]
            hops[there] = (via, Role.CUSTOMER)
        frontier = sorted(reached)

    climbed = set(paths)
    for node in topology.nodes:
        if node.asn in paths:
            continue
        chosen = None
        for nbr in topology.neighbors(node.asn):
            if nbr.role in (Role.PEER, Role.IXP) and nbr.asn in climbed:
                key = (len(paths[nbr.asn]), nbr.asn)
                if chosen is None or key < chosen[0]:
                    chosen = (key, nbr)
        if chosen is not None:
            via = chosen[1]
            paths[node.asn] = (via.asn,) + paths[via.asn]
            hops[node.asn] = (via.asn, via.role)

    heap = []
    for here in paths:
        _push_customers(topology, heap, here, len(paths[here]) + 1, paths)
    while heap:
        length, via, there = heapq.heappop(heap)
        if there in paths:
            continue
        paths[there] = (via,) + paths[via]
        hops[there] = (via, Role.PROVIDER)
        _push_customers(topology, heap, there, length + 1, paths)

    label = f"AS{asn}"
    routes = {
        asn: RibEntry.construct(
            asn=asn,
            prefix=label,
            as_path=(),
            next_hop_asn=None,
            origin_site_id=None,
            local_pref=ORIGIN_PREF,
            learned_from=None,
        )
    }
    for there, (via, role) in hops.items():
        routes[there] = RibEntry.construct(
            asn=there,
            prefix=label,
            as_path=paths[there],
            next_hop_asn=via,
            origin_site_id=None,
            local_pref=LOCAL_PREF[role],
            learned_from=role,
        )
    return routes


def _push_customers(topology, heap, here, length, paths):
    for nbr in topology.neighbors(here):
        if nbr.role is Role.CUSTOMER and nbr.asn not in paths:
            heapq.heappush(heap, (length, here, nbr.asn))


def unicast_path(
    routes: Dict[int, RibEntry], from_asn: int, to_asn: int
) -> List[int]:
    """Follow unicast routes (from `unicast_routes`) between two ASes."""
    return _follow(routes, from_asn, f"AS{to_asn}")


def _follow(routes, from_asn, prefix) -> List[int]:
    entry = routes.get(from_asn)
    if entry is None:
        raise NoRouteError(from_asn, prefix)

    hops = []
    seen = {from_asn}
    while entry.next_hop_asn is not None:
        hop = entry.next_hop_asn
        if hop in seen:
            raise OscillationError(prefix, len(hops))
        seen.add(hop)
        hops.append(hop)
        entry = routes.get(hop)
        if entry is None:
            raise NoRouteError(hop, prefix)

    return hops


def _covers(announced, query) -> bool:
    if announced.version != query.version:
        return False
    return query == announced or query.subnet_of(announced)
