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

"""The built-in twelve-site testbed topology.

The fixture describes the anycast testbed's measurement sites, their
transit providers and the traffic-engineering policies each upstream
honors.  A site whose transit provider serves no other site is hosted
inside that provider's AS; every other site gets a dedicated host AS
(65000 + its row number) that buys transit from the listed providers.
All transit ASes peer with each other.

A cloud of stub ASes (the clients) is attached under a fixed seed:
each stub buys transit from one or two transit ASes.  Sites connected
to an IXP also peer with a handful of stubs over the exchange.

The consolidation ("master") site only gathers measurement data and
announces nothing, so it is not modelled here.

"""

from collections import Counter
import random
from typing import NamedTuple, Optional, Tuple

from anylab.topology.loader import allocate_vantage_prefixes
from anylab.topology.types import (
    AnycastSite,
    AsNode,
    AsTopology,
    Link,
    Policy,
    PrefixDescriptor,
    Relationship,
    default_latency,
)

STUB_ASN_BASE = 4_200_000_000
HOST_ASN_BASE = 65000
TRANSIT_VPS = 4
STUB_VPS = (300, 900)


class SiteRow(NamedTuple):

    """One row of the site table."""

    site_id: str
    location: str
    providers: Tuple[int, ...]
    ixp: Optional[str]
    peers: int


TRANSIT = {
    20473: ("Vultr", "na"),
    20080: ("Ampath", "na"),
    1251: ("ANSP", "sa"),
    262605: ("Leovin", "sa"),
    264575: ("Nexfibra", "sa"),
    39839: ("DK-Hostmaster", "eu"),
    2500: ("WIDE", "as"),
    1133: ("UTwente", "eu"),
    4: ("USC", "na"),
    226: ("LosNettos", "na"),
    1140: ("SIDN", "eu"),
}

SITES = (
    SiteRow("au-syd", "Sydney, Australia", (20473,), None, 1),
    SiteRow("br-gru", "Sao Paulo, Brazil", (20080, 1251), "spo.IX.br", 1892),
    SiteRow(
        "br-poa", "Porto Alegre, Brazil", (262605, 264575), "poa.IX.br", 218
    ),
    SiteRow("dk-cop", "Copenhagen, Denmark", (39839,), None, 1),
    SiteRow("uk-lnd", "London, United Kingdom", (20473,), "LINX", 1),
    SiteRow("fr-par", "Paris, France", (20473,), "France-IX", 1),
    SiteRow("jp-hnd", "Tokyo, Japan", (2500,), None, 1),
    SiteRow("nl-ens", "Enschede, Netherlands", (1133,), None, 1),
    SiteRow("us-los", "Los Angeles, United States", (4,), None, 1),
    SiteRow("us-mia", "Miami, United States", (20080,), None, 1),
    SiteRow("us-was", "Washington, United States", (226,), None, 1),
    SiteRow("nl-arn", "Arnhem, Netherlands", (1140,), None, 1),
)

_FULL = frozenset(
    {
        Policy.PREPEND,
        Policy.NO_PEER,
        Policy.NO_EXPORT,
        Policy.SELECTIVE_PREPEND,
        Policy.SELECTIVE_ADVERTISE,
    }
)

CAPABILITIES = {
    "au-syd": _FULL,
    "br-gru": _FULL | {Policy.NO_CLIENT},
    "br-poa": _FULL,
    "uk-lnd": _FULL,
    "fr-par": _FULL,
    "us-mia": _FULL | {Policy.NO_CLIENT},
}

COUNTRY_REGIONS = {
    "au": "oc",
    "br": "sa",
    "dk": "eu",
    "uk": "eu",
    "fr": "eu",
    "nl": "eu",
    "jp": "as",
    "us": "na",
}

PREFIXES = (
    PrefixDescriptor(cidr="145.100.118.0/23", family=4),
    PrefixDescriptor(cidr="2001:610:9000::/40", family=6),
    PrefixDescriptor(
        cidr="2001:610:900::/40", family=6, alias_of="2001:610:9000::/40"
    ),
)


def site_region(site_id: str) -> str:
    """Return the region of a site, from its country prefix."""
    return COUNTRY_REGIONS[site_id.split("-", 1)[0]]


def tangled_fixture(
    seed: int = 1, stubs: int = 200, ixp_fanout: int = 10
) -> AsTopology:
    """Build the twelve-site testbed topology.

    Args:
        seed (int): seed of the stub cloud.
        stubs (int): number of stub ASes.
        ixp_fanout (int): upper bound of IXP peers per IXP site.

    Returns:
        topology (AsTopology): the same topology for the same arguments.

    """
    rng = random.Random(seed)
    regions = {asn: region for asn, (_, region) in TRANSIT.items()}
    names = {asn: name for asn, (name, _) in TRANSIT.items()}
    hosted = {}
    links = []

    transit = sorted(TRANSIT)
    for i, asn in enumerate(transit):
        for other in transit[i + 1:]:
            links.append(_link(asn, other, Relationship.PEER, regions))

    shared = Counter(asn for row in SITES for asn in row.providers)
    for number, row in enumerate(SITES, start=1):
        if len(row.providers) == 1 and shared[row.providers[0]] == 1:
            hosted[row.providers[0]] = row.site_id
            continue

        host = HOST_ASN_BASE + number
        hosted[host] = row.site_id
        regions[host] = site_region(row.site_id)
        names[host] = row.site_id.split("-", 1)[1] + "-host"
        for provider in row.providers:
            links.append(
                _link(host, provider, Relationship.CUSTOMER_OF, regions)
            )

    vps = {asn: TRANSIT_VPS for asn in transit}
    access = {}
    stub_asns = [STUB_ASN_BASE + i for i in range(1, stubs + 1)]
    for stub in stub_asns:
        count = 1 if rng.random() < 0.7 else 2
        providers = sorted(rng.sample(transit, count))
        regions[stub] = regions[providers[0]]
        names[stub] = f"stub{stub - STUB_ASN_BASE}"
        vps[stub] = rng.randint(*STUB_VPS)
        access[stub] = round(rng.uniform(0.5, 5.0), 3)
        for provider in providers:
            links.append(
                _link(stub, provider, Relationship.CUSTOMER_OF, regions)
            )

    site_hosts = {site_id: asn for asn, site_id in hosted.items()}
    for row in SITES:
        if row.ixp is None or not stub_asns:
            continue

        host = site_hosts[row.site_id]
        count = min(row.peers, ixp_fanout, len(stub_asns))
        for stub in sorted(rng.sample(stub_asns, count)):
            links.append(_link(host, stub, Relationship.IXP_PEER, regions))

    allocation = allocate_vantage_prefixes(vps)
    nodes = [
        AsNode(
            asn=asn,
            name=names[asn],
            hosts_site=hosted.get(asn),
            vantage_prefixes=allocation.get(asn, ()),
            region=regions[asn],
            **({"access_ms": access[asn]} if asn in access else {}),
        )
        for asn in names
    ]
    sites = [
        AnycastSite(
            site_id=row.site_id,
            host_asn=site_hosts[row.site_id],
            te_capabilities=CAPABILITIES.get(
                row.site_id, frozenset({Policy.PREPEND})
            ),
        )
        for row in SITES
    ]

    return AsTopology(
        nodes=tuple(nodes),
        links=tuple(links),
        sites=tuple(sites),
        anycast_prefixes=PREFIXES,
    )


def _link(asn, other, relationship, regions) -> Link:
    return Link(
        from_asn=asn,
        to_asn=other,
        relationship=relationship,
        latency_ms=default_latency(regions.get(asn), regions.get(other)),
    )
