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

"""Topology file reader and writer.

A topology file is line-oriented text.  `#` starts a comment and blank
lines are ignored.  Four record kinds exist:

```
as 20473 Vultr region=na vps=4
as 65001 syd-host site=au-syd region=oc access=0.5
link 65001 20473 c2p lat=80
prefix 145.100.118.0/23
prefix 2001:610:900::/40 alias=2001:610:9000::/40
cap au-syd Prepend,noPeer,noExport
```

Records may appear in any order.  `link` relationships are written
`c2p` (the first AS is a customer of the second), `p2c`, `p2p` or
`ixp`.  When `lat=` is omitted, the latency is derived from the
regions of both ends.  `vps=<n>` allocates n vantage /24 networks to
the AS; allocation is sequential, in ascending AS order, so the same
file always yields the same networks.  A `cap` record normally names a
site declared by an `as` record; it may instead give `host=<asn>`.

"""

import ipaddress
import logging
from typing import Dict, Iterable, List, Tuple

from anylab.errors import TopologyParseError, TopologyValidationError
from anylab.topology.types import (
    DEFAULT_ACCESS_MS,
    AnycastSite,
    AsNode,
    AsTopology,
    Link,
    Policy,
    PrefixDescriptor,
    Relationship,
    default_latency,
)
from anylab.topology.validation import validate

logger = logging.getLogger(__name__)

VANTAGE_BASE = ipaddress.IPv4Address("1.0.0.0")

RELATIONSHIPS = {
    "c2p": Relationship.CUSTOMER_OF,
    "p2c": Relationship.PROVIDER_OF,
    "p2p": Relationship.PEER,
    "ixp": Relationship.IXP_PEER,
}
REL_NAMES = {rel: name for name, rel in RELATIONSHIPS.items()}

AS_OPTIONS = {"site", "vps", "region", "access"}


def allocate_vantage_prefixes(
    counts: Dict[int, int]
) -> Dict[int, Tuple[str, ...]]:
    """Allocate vantage /24 networks to ASes.

    Args:
        counts (dict): the number of /24 networks wanted per AS.

    Returns:
        allocation (dict): AS number to a tuple of /24 CIDR strings.
                Networks are handed out from 1.0.0.0 upward, in
                ascending AS order.

    """
    allocation = {}
    offset = 0
    for asn in sorted(counts):
        wanted = counts[asn]
        allocation[asn] = tuple(
            f"{VANTAGE_BASE + (offset + i) * 256}/24" for i in range(wanted)
        )
        offset += wanted

    return allocation


def parse_topology(source: str) -> AsTopology:
    """Parse a topology document without validating it.

    Args:
        source (str): the document.

    Returns:
        topology (AsTopology): the parsed topology, possibly invalid.

    Raises:
        TopologyParseError: a line could not be parsed.

    """
    nodes = []
    vps = {}
    raw_links = []
    prefixes = []
    caps = {}
    cap_lines = {}

    for number, line in enumerate(source.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue

        kind, *args = line.split()
        if kind == "as":
            node, count = _parse_as(number, args)
            nodes.append(node)
            vps[node["asn"]] = vps.get(node["asn"], 0) + count
        elif kind == "link":
            raw_links.append((number, _parse_link(number, args)))
        elif kind == "prefix":
            prefixes.append(_parse_prefix(number, args))
        elif kind == "cap":
            site_id, policies, host = _parse_cap(number, args)
            if site_id in caps:
                raise TopologyParseError(
                    number, f"duplicate cap record for {site_id}"
                )
            caps[site_id] = policies
            cap_lines[site_id] = (number, host)
        else:
            raise TopologyParseError(number, f"unknown record {kind!r}")

    regions = {}
    for node in nodes:
        regions.setdefault(node["asn"], node.get("region"))

    links = []
    for _, fields in raw_links:
        if fields.get("latency_ms") is None:
            fields["latency_ms"] = default_latency(
                regions.get(fields["from_asn"]), regions.get(fields["to_asn"])
            )
        links.append(Link(**fields))

    allocation = allocate_vantage_prefixes(vps)
    built_nodes = []
    sites = []
    for node in nodes:
        node["vantage_prefixes"] = allocation[node["asn"]]
        built_nodes.append(AsNode(**node))
        site_id = node.get("hosts_site")
        if site_id is not None:
            sites.append(
                AnycastSite(
                    site_id=site_id,
                    host_asn=node["asn"],
                    te_capabilities=caps.get(
                        site_id, frozenset({Policy.PREPEND})
                    ),
                )
            )

    # A cap record may name the host of a site no `as` record claims;
    # validation then reports the mismatch.
    declared = {site.site_id for site in sites}
    for site_id, (number, host) in cap_lines.items():
        if site_id in declared:
            continue
        if host is None:
            raise TopologyParseError(
                number, f"cap record for undeclared site {site_id}"
            )
        sites.append(
            AnycastSite(
                site_id=site_id, host_asn=host, te_capabilities=caps[site_id]
            )
        )

    return AsTopology(
        nodes=tuple(built_nodes),
        links=tuple(links),
        sites=tuple(sites),
        anycast_prefixes=tuple(prefixes),
    )


def load_topology(source: str) -> AsTopology:
    """Parse and validate a topology document.

    Args:
        source (str): the document.

    Returns:
        topology (AsTopology): a topology satisfying every invariant.

    Raises:
        TopologyParseError: a line could not be parsed.
        TopologyValidationError: the topology is not valid.

    """
    topology = parse_topology(source)
    violations = validate(topology)
    if violations:
        raise TopologyValidationError(violations)

    logger.info(
        "loaded %d ASes, %d links, %d sites",
        len(topology.nodes),
        len(topology.links),
        len(topology.sites),
    )
    return topology


def serialize(topology: AsTopology) -> str:
    """Write a topology in canonical form.

    `load_topology(serialize(topology))` returns an equal topology
    when its vantage networks follow the sequential allocation.

    """
    lines = []
    for node in sorted(topology.nodes, key=lambda node: node.asn):
        words = ["as", str(node.asn), node.name]
        if node.hosts_site is not None:
            words.append(f"site={node.hosts_site}")
        if node.vantage_prefixes:
            words.append(f"vps={len(node.vantage_prefixes)}")
        if node.region is not None:
            words.append(f"region={node.region}")
        if node.access_ms != DEFAULT_ACCESS_MS:
            words.append(f"access={node.access_ms!r}")
        lines.append(" ".join(words))

    for link in topology.links:
        lines.append(
            f"link {link.from_asn} {link.to_asn} "
            f"{REL_NAMES[link.relationship]} lat={link.latency_ms!r}"
        )

    for prefix in topology.anycast_prefixes:
        line = f"prefix {prefix.cidr}"
        if prefix.alias_of is not None:
            line += f" alias={prefix.alias_of}"
        lines.append(line)

    for site in sorted(topology.sites, key=lambda site: site.site_id):
        policies = [
            policy.value for policy in Policy if policy in site.te_capabilities
        ]
        lines.append(f"cap {site.site_id} {','.join(policies)}")

    return "\n".join(lines) + "\n"


def _options(number: int, words: Iterable[str], allowed) -> Dict[str, str]:
    options = {}
    for word in words:
        key, sep, value = word.partition("=")
        if not sep or not value:
            raise TopologyParseError(number, f"expected key=value: {word!r}")
        if key not in allowed:
            raise TopologyParseError(number, f"unknown option {key!r}")
        if key in options:
            raise TopologyParseError(number, f"option {key!r} given twice")
        options[key] = value
    return options


def _number(number: int, text: str, kind=int):
    try:
        return kind(text)
    except ValueError:
        raise TopologyParseError(
            number, f"expected a {kind.__name__}, got {text!r}"
        )


def _parse_as(number: int, args: List[str]):
    if len(args) < 2:
        raise TopologyParseError(number, "usage: as <asn> <name> [options]")

    asn = _number(number, args[0])
    if asn <= 0:
        raise TopologyParseError(number, f"AS number must be positive: {asn}")

    options = _options(number, args[2:], AS_OPTIONS)
    node = {"asn": asn, "name": args[1]}
    if "site" in options:
        node["hosts_site"] = options["site"]
    if "region" in options:
        node["region"] = options["region"]
    if "access" in options:
        access = _number(number, options["access"], float)
        if access <= 0:
            raise TopologyParseError(number, "access latency must be > 0")
        node["access_ms"] = access

    count = _number(number, options.get("vps", "0"))
    if count < 0:
        raise TopologyParseError(number, "vps must be >= 0")

    return node, count


def _parse_link(number: int, args: List[str]):
    if len(args) < 3:
        raise TopologyParseError(
            number, "usage: link <asn1> <asn2> <c2p|p2c|p2p|ixp> [lat=<ms>]"
        )

    relationship = RELATIONSHIPS.get(args[2])
    if relationship is None:
        raise TopologyParseError(number, f"unknown relationship {args[2]!r}")

    options = _options(number, args[3:], {"lat"})
    latency = None
    if "lat" in options:
        latency = _number(number, options["lat"], float)

    return {
        "from_asn": _number(number, args[0]),
        "to_asn": _number(number, args[1]),
        "relationship": relationship,
        "latency_ms": latency,
    }


def _parse_prefix(number: int, args: List[str]) -> PrefixDescriptor:
    if not args:
        raise TopologyParseError(number, "usage: prefix <cidr> [alias=<cidr>]")

    options = _options(number, args[1:], {"alias"})
    try:
        network = ipaddress.ip_network(args[0], strict=True)
        return PrefixDescriptor(
            cidr=str(network),
            family=network.version,
            alias_of=options.get("alias"),
        )
    except ValueError as err:
        raise TopologyParseError(number, f"malformed prefix: {err}")


def _parse_cap(number: int, args: List[str]):
    if len(args) not in (2, 3):
        raise TopologyParseError(
            number, "usage: cap <site_id> <policy>[,<policy>...] [host=<asn>]"
        )

    policies = set()
    for name in args[1].split(","):
        try:
            policies.add(Policy.parse(name))
        except ValueError as err:
            raise TopologyParseError(number, str(err))

    host = None
    options = _options(number, args[2:], {"host"})
    if "host" in options:
        host = _number(number, options["host"])

    return args[0], frozenset(policies), host
