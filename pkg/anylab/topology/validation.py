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

"""Topology invariant checks.

`validate` never raises: violations are data, one human-readable line
per broken rule, naming the entity at fault.  `notices` reports
findings that do not make a topology invalid.

"""

from collections import Counter
import re
from typing import List

import networkx as nx

from anylab.topology.types import AsTopology, Policy

SITE_ID = re.compile(r"^[a-z]{2}-[a-z]{3}$")


def validate(topology: AsTopology) -> List[str]:
    """Check every topology invariant.

    Args:
        topology (AsTopology): the topology to check.

    Returns:
        violations (list of str): empty if the topology is valid.

    """
    violations = []
    violations += _check_nodes(topology)
    violations += _check_links(topology)
    violations += _check_sites(topology)
    violations += _check_prefixes(topology)

    # Graph-wide checks only make sense on a well-formed node set.
    if topology.nodes:
        violations += _check_connected(topology)
        violations += _check_acyclic(topology)

    return violations


def notices(topology: AsTopology) -> List[str]:
    """Return non-fatal findings about a topology."""
    found = []
    for prefix in topology.anycast_prefixes:
        if prefix.alias_of is not None:
            found.append(
                f"prefix {prefix.cidr} is declared as an alias of "
                f"{prefix.alias_of}: the two spellings disagree and "
                "neither is assumed canonical"
            )
    return found


def _check_nodes(topology):
    violations = []
    counts = Counter(node.asn for node in topology.nodes)
    for asn, count in sorted(counts.items()):
        if count > 1:
            violations.append(f"AS{asn}: asn declared {count} times")

    for node in topology.nodes:
        if not node.name or any(char.isspace() for char in node.name):
            violations.append(f"AS{node.asn}: name must be a single word")

    hosted = Counter(
        node.hosts_site for node in topology.nodes if node.hosts_site
    )
    for site_id, count in sorted(hosted.items()):
        if count > 1:
            violations.append(
                f"site {site_id}: hosted by {count} ASes, at most one allowed"
            )

    return violations


def _check_links(topology):
    violations = []
    known = topology.node_index
    pairs = Counter()
    for link in topology.links:
        label = f"link {link.from_asn}-{link.to_asn}"
        if link.from_asn == link.to_asn:
            violations.append(f"{label}: self-link")
        for asn in (link.from_asn, link.to_asn):
            if asn not in known:
                violations.append(f"{label}: AS{asn} is not declared")
        if link.latency_ms < 0:
            violations.append(f"{label}: negative latency {link.latency_ms}")
        pairs[link.pair] += 1

    for pair, count in pairs.items():
        if count > 1 and len(pair) == 2:
            low, high = sorted(pair)
            violations.append(
                f"link {low}-{high}: {count} links for one AS pair"
            )

    return violations


def _check_sites(topology):
    violations = []
    known = topology.node_index
    counts = Counter(site.site_id for site in topology.sites)
    for site_id, count in sorted(counts.items()):
        if count > 1:
            violations.append(f"site {site_id}: declared {count} times")

    for site in topology.sites:
        label = f"site {site.site_id}"
        if not SITE_ID.match(site.site_id):
            violations.append(
                f"{label}: identifier must look like cc-xyz (e.g. au-syd)"
            )
        if Policy.PREPEND not in site.te_capabilities:
            violations.append(f"{label}: capabilities must include Prepend")

        host = known.get(site.host_asn)
        if host is None:
            violations.append(
                f"{label}: host AS{site.host_asn} is not declared"
            )
        elif host.hosts_site != site.site_id:
            violations.append(
                f"{label}: AS{site.host_asn} does not declare this site"
            )

    declared = set(counts)
    for node in topology.nodes:
        if node.hosts_site and node.hosts_site not in declared:
            violations.append(
                f"AS{node.asn}: hosts unknown site {node.hosts_site}"
            )

    return violations


def _check_prefixes(topology):
    violations = []
    cidrs = {prefix.cidr for prefix in topology.anycast_prefixes}
    for prefix in topology.anycast_prefixes:
        if prefix.alias_of is not None and prefix.alias_of not in cidrs:
            violations.append(
                f"prefix {prefix.cidr}: alias of undeclared {prefix.alias_of}"
            )
    return violations


def _check_connected(topology):
    graph = topology.graph.subgraph(topology.node_index)
    components = sorted(
        nx.connected_components(graph),
        key=lambda component: (-len(component), min(component)),
    )
    violations = []
    for component in components[1:]:
        for asn in sorted(component):
            violations.append(
                f"AS{asn}: not connected to the rest of the topology"
            )
    return violations


def _check_acyclic(topology):
    graph = topology.provider_graph.subgraph(topology.node_index)
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        return []

    path = " -> ".join(f"AS{edge[0]}" for edge in cycle)
    return [f"customer-provider cycle: {path} -> AS{cycle[0][0]}"]
