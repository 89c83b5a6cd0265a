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

"""Small random topologies for property and oracle checks."""

import random
from typing import Optional

from anylab.topology.types import (
    AnycastSite,
    AsNode,
    AsTopology,
    Link,
    Policy,
    PrefixDescriptor,
    Relationship,
)

ALL_POLICIES = frozenset(Policy)


def random_topology(
    rng: random.Random,
    size: Optional[int] = None,
    sites: int = 2,
    relationships=None,
    extra_links: float = 0.3,
) -> AsTopology:
    """Generate a small, connected, valid topology.

    ASes are numbered 1 to `size`.  A random spanning tree guarantees
    connectivity; more links are then added with probability
    `extra_links` per pair.  Customer-to-provider links always go from
    the higher to the lower AS number, so the provider graph is acyclic.

    Args:
        rng (random.Random): the source of randomness.
        size (int): number of ASes, 3 to 8 when not given.
        sites (int): number of anycast sites, hosted by distinct ASes.
        relationships (sequence): relationship classes to draw from,
                all of them when not given.
        extra_links (float): probability of an extra link per pair.

    Returns:
        topology (AsTopology): a valid topology announcing
                10.0.0.0/16, whose sites support every policy.

    """
    size = size if size is not None else rng.randint(3, 8)
    relationships = list(relationships or ("c2p", "p2p", "ixp"))
    asns = list(range(1, size + 1))

    pairs = set()
    for asn in asns[1:]:
        pairs.add((rng.randrange(1, asn), asn))
    for low in asns:
        for high in asns[low:]:
            if (low, high) not in pairs and rng.random() < extra_links:
                pairs.add((low, high))

    links = []
    for low, high in sorted(pairs):
        kind = rng.choice(relationships)
        if kind == "c2p":
            link = Link(
                from_asn=high,
                to_asn=low,
                relationship=Relationship.CUSTOMER_OF,
                latency_ms=float(rng.randint(1, 50)),
            )
        else:
            link = Link(
                from_asn=low,
                to_asn=high,
                relationship=(
                    Relationship.PEER if kind == "p2p"
                    else Relationship.IXP_PEER
                ),
                latency_ms=float(rng.randint(1, 50)),
            )
        links.append(link)

    hosts = sorted(rng.sample(asns, min(sites, size)))
    site_ids = {
        host: f"s{chr(ord('a') + i)}-{chr(ord('a') + i) * 3}"
        for i, host in enumerate(hosts)
    }
    nodes = [
        AsNode(
            asn=asn,
            name=f"as{asn}",
            hosts_site=site_ids.get(asn),
            vantage_prefixes=(f"192.168.{asn}.0/24",),
        )
        for asn in asns
    ]
    anycast_sites = [
        AnycastSite(
            site_id=site_id, host_asn=host, te_capabilities=ALL_POLICIES
        )
        for host, site_id in site_ids.items()
    ]

    return AsTopology(
        nodes=tuple(nodes),
        links=tuple(links),
        sites=tuple(anycast_sites),
        anycast_prefixes=(PrefixDescriptor(cidr="10.0.0.0/16", family=4),),
    )
