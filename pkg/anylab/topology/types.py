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

"""Domain types of the AS-level world model.

An `AsTopology` gathers AS nodes, the typed links between them, the
anycast sites hosted in some of these ASes and the anycast prefixes
the sites may announce.  Topologies are frozen: build a new one rather
than modifying an existing one.

Links are stored once and viewed from both ends.  A link declared as
`Link(from_asn=A, to_asn=B, relationship=CUSTOMER_OF)` means A is a
customer of B, so B sees A with the role `Role.CUSTOMER` and A sees
B with the role `Role.PROVIDER`.

"""

from enum import Enum
import ipaddress
from typing import Dict, FrozenSet, NamedTuple, Optional, Tuple

import networkx as nx
from pydantic import Field, validator

from anylab.errors import PrefixError, UnknownSiteError
from anylab.model import Model, lazy_property

INTRA_REGION_MS = 10.0
INTER_REGION_MS = 80.0
DEFAULT_ACCESS_MS = 0.5


class Relationship(str, Enum):

    """Business relationship of a link, read from `from_asn`."""

    CUSTOMER_OF = "customer-of"
    PROVIDER_OF = "provider-of"
    PEER = "peer"
    IXP_PEER = "ixp-peer"


class Role(str, Enum):

    """Role a neighbor plays, seen from one end of a link."""

    CUSTOMER = "customer"
    PROVIDER = "provider"
    PEER = "peer"
    IXP = "ixp"


class Policy(str, Enum):

    """Traffic-engineering policies an upstream may support."""

    PREPEND = "Prepend"
    NO_PEER = "noPeer"
    NO_EXPORT = "noExport"
    NO_CLIENT = "noClient"
    SELECTIVE_PREPEND = "SelectivePrepend"
    SELECTIVE_ADVERTISE = "SelectiveAdvertise"

    @classmethod
    def parse(cls, name: str) -> "Policy":
        """Return the policy matching a name, ignoring case."""
        wanted = name.strip().lower()
        for member in cls:
            if member.value.lower() == wanted:
                return member

        raise ValueError(f"unknown policy: {name!r}")


class Neighbor(NamedTuple):

    """A neighbor of an AS, as seen from that AS."""

    asn: int
    role: Role
    latency_ms: float


class AsNode(Model):

    """An autonomous system."""

    asn: int = Field(..., gt=0)
    name: str
    hosts_site: Optional[str] = None
    vantage_prefixes: Tuple[str, ...] = ()
    region: Optional[str] = None
    access_ms: float = Field(DEFAULT_ACCESS_MS, gt=0)


class Link(Model):

    """A link between two ASes, stored once."""

    from_asn: int
    to_asn: int
    relationship: Relationship
    latency_ms: float = INTER_REGION_MS

    @property
    def pair(self) -> FrozenSet[int]:
        """Return the unordered pair of AS numbers."""
        return frozenset((self.from_asn, self.to_asn))

    def role_of(self, asn: int) -> Role:
        """Return the role the other end plays for `asn`.

        Args:
            asn (int): one end of the link.

        Returns:
            role (Role): how `asn` sees its neighbor on this link.

        """
        if asn == self.from_asn:
            forward = True
        elif asn == self.to_asn:
            forward = False
        else:
            raise ValueError(f"AS{asn} is not an end of this link")

        rel = self.relationship
        if rel is Relationship.PEER:
            return Role.PEER
        if rel is Relationship.IXP_PEER:
            return Role.IXP

        # From the declaring end, customer-of means "the other end is
        # my provider".
        customer_side = rel is Relationship.CUSTOMER_OF
        if forward == customer_side:
            return Role.PROVIDER
        return Role.CUSTOMER

    def canonical(self) -> "Link":
        """Return the same link with provider-of turned around."""
        if self.relationship is not Relationship.PROVIDER_OF:
            return self

        return Link(
            from_asn=self.to_asn,
            to_asn=self.from_asn,
            relationship=Relationship.CUSTOMER_OF,
            latency_ms=self.latency_ms,
        )


class AnycastSite(Model):

    """An anycast site and the policies its upstream honors."""

    site_id: str
    host_asn: int
    te_capabilities: FrozenSet[Policy] = frozenset({Policy.PREPEND})

    def supports(self, policy: Policy) -> bool:
        return policy in self.te_capabilities


class PrefixDescriptor(Model):

    """An anycast prefix, with its address family."""

    cidr: str
    family: int = 4
    alias_of: Optional[str] = None

    @validator("cidr", "alias_of")
    def _normalize(cls, value):
        if value is None:
            return value
        try:
            return str(ipaddress.ip_network(value, strict=True))
        except ValueError as err:
            raise ValueError(f"malformed prefix {value!r}: {err}")

    @validator("family", always=True)
    def _family_matches(cls, value, values):
        cidr = values.get("cidr")
        if cidr is not None:
            actual = ipaddress.ip_network(cidr).version
            if value != actual:
                raise ValueError(f"{cidr} is an IPv{actual} prefix")
        return value

    @property
    def network(self):
        return ipaddress.ip_network(self.cidr)


class AsTopology(Model):

    """The AS-level world: nodes, links, sites and anycast prefixes."""

    nodes: Tuple[AsNode, ...] = ()
    links: Tuple[Link, ...] = ()
    sites: Tuple[AnycastSite, ...] = ()
    anycast_prefixes: Tuple[PrefixDescriptor, ...] = ()

    @validator("nodes")
    def _sort_nodes(cls, nodes):
        return tuple(sorted(nodes, key=lambda node: node.asn))

    @validator("sites")
    def _sort_sites(cls, sites):
        return tuple(sorted(sites, key=lambda site: site.site_id))

    @lazy_property
    def node_index(self) -> Dict[int, AsNode]:
        """Return the nodes by AS number (first declaration wins)."""
        index = {}
        for node in self.nodes:
            index.setdefault(node.asn, node)
        return index

    @lazy_property
    def site_index(self) -> Dict[str, AnycastSite]:
        """Return the sites by identifier."""
        index = {}
        for site in self.sites:
            index.setdefault(site.site_id, site)
        return index

    @lazy_property
    def site_by_asn(self) -> Dict[int, AnycastSite]:
        """Return the sites by host AS number."""
        return {site.host_asn: site for site in self.sites}

    @lazy_property
    def adjacency(self) -> Dict[int, Tuple[Neighbor, ...]]:
        """Return, for every AS, its neighbors sorted by AS number."""
        neighbors = {asn: [] for asn in self.node_index}
        for link in self.links:
            if link.from_asn == link.to_asn:
                continue

            for here, there in (
                (link.from_asn, link.to_asn),
                (link.to_asn, link.from_asn),
            ):
                if here in neighbors and there in self.node_index:
                    neighbors[here].append(
                        Neighbor(there, link.role_of(here), link.latency_ms)
                    )

        return {
            asn: tuple(sorted(found, key=lambda nbr: nbr.asn))
            for asn, found in neighbors.items()
        }

    @lazy_property
    def neighbor_index(self) -> Dict[int, Dict[int, Neighbor]]:
        """Return, for every AS, its neighbors keyed by AS number."""
        return {
            asn: {nbr.asn: nbr for nbr in neighbors}
            for asn, neighbors in self.adjacency.items()
        }

    @lazy_property
    def graph(self) -> nx.Graph:
        """Return the undirected AS graph."""
        graph = nx.Graph()
        graph.add_nodes_from(self.node_index)
        for link in self.links:
            graph.add_edge(link.from_asn, link.to_asn)
        return graph

    @lazy_property
    def provider_graph(self) -> nx.DiGraph:
        """Return the customer-to-provider directed graph."""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.node_index)
        for link in self.links:
            link = link.canonical()
            if link.relationship is Relationship.CUSTOMER_OF:
                graph.add_edge(link.from_asn, link.to_asn)
        return graph

    def node(self, asn: int) -> AsNode:
        """Return the AS node with this number.

        Raises:
            KeyError: no such AS.

        """
        return self.node_index[asn]

    def site(self, site_id: str) -> AnycastSite:
        """Return the site with this identifier.

        Raises:
            UnknownSiteError: no such site.

        """
        site = self.site_index.get(site_id)
        if site is None:
            raise UnknownSiteError(site_id)
        return site

    def neighbors(self, asn: int) -> Tuple[Neighbor, ...]:
        return self.adjacency.get(asn, ())

    def role(self, asn: int, other: int) -> Role:
        """Return the role `other` plays for `asn`."""
        return self.neighbor_index[asn][other].role

    def latency(self, asn: int, other: int) -> float:
        """Return the one-way latency of the link between two ASes."""
        return self.neighbor_index[asn][other].latency_ms

    def path_latency(self, hops) -> float:
        """Return the summed link latency along a sequence of ASes."""
        hops = list(hops)
        return sum(
            self.latency(here, there) for here, there in zip(hops, hops[1:])
        )

    def covering_prefix(self, cidr: str) -> PrefixDescriptor:
        """Return the declared anycast prefix covering a prefix.

        Args:
            cidr (str): an announced prefix, equal to or more specific
                    than a declared anycast prefix.

        Raises:
            PrefixError: the prefix is malformed or not covered.

        """
        try:
            network = ipaddress.ip_network(cidr, strict=True)
        except ValueError as err:
            raise PrefixError(f"malformed prefix {cidr!r}: {err}")

        for descriptor in self.anycast_prefixes:
            declared = descriptor.network
            if declared.version != network.version:
                continue
            if network == declared or network.subnet_of(declared):
                return descriptor

        raise PrefixError(
            f"{network} is not within a declared anycast prefix"
        )


def default_latency(region: Optional[str], other: Optional[str]) -> float:
    """Return the default one-way latency between two regions."""
    if region is not None and region == other:
        return INTRA_REGION_MS
    return INTER_REGION_MS
