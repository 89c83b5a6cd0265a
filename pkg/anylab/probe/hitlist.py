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

"""Hit lists: one responsive address per /24 (or /48) network."""

import csv
import io
import ipaddress
import logging
import random
from typing import Iterable, List, Optional, TextIO

from pydantic import validator

from anylab.errors import HitListError
from anylab.model import Model, lazy_property
from anylab.topology.types import AsTopology

logger = logging.getLogger(__name__)

HEADER = ("address", "cc", "asn")

REGION_COUNTRIES = {
    "oc": ("AU", "NZ"),
    "sa": ("BR", "AR", "CL"),
    "eu": ("NL", "GB", "FR", "DE", "DK"),
    "as": ("JP", "KR", "SG"),
    "na": ("US", "CA", "MX"),
}
DEFAULT_COUNTRIES = ("US",)


class HitListEntry(Model):

    """A vantage point: an address, its country and its AS."""

    address: str
    cc: str
    asn: int
    routable: bool = True

    @validator("address")
    def _normalize(cls, value):
        return str(ipaddress.ip_address(value))

    @lazy_property
    def ip(self):
        return ipaddress.ip_address(self.address)

    @lazy_property
    def network(self) -> str:
        """Return the /24 (IPv4) or /48 (IPv6) holding the address."""
        ip = self.ip
        length = 24 if ip.version == 4 else 48
        host_bits = ip.max_prefixlen - length
        base = type(ip)(int(ip) >> host_bits << host_bits)
        return f"{base}/{length}"


def load_hitlist(
    source: str, topology: Optional[AsTopology] = None
) -> List[HitListEntry]:
    """Read a hit list.

    Rows are `address,cc,asn`; a header row with these names is
    optional.  Only the first address of each /24 (or /48) is kept.

    Args:
        source (str): the CSV document.
        topology (AsTopology, optional): when given, entries whose AS
                is not in the topology are kept but marked unroutable.

    Returns:
        entries (list of HitListEntry): in input order.

    Raises:
        HitListError: a row is malformed.

    """
    entries = []
    seen = set()
    reader = csv.reader(io.StringIO(source))
    for row in reader:
        number = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if row[0].startswith("#"):
            continue

        row = [cell.strip() for cell in row]
        if tuple(cell.lower() for cell in row) == HEADER:
            continue
        if len(row) != 3:
            raise HitListError(number, f"expected 3 columns, got {len(row)}")

        address, cc, asn = row
        try:
            ip = ipaddress.ip_address(address)
        except ValueError:
            raise HitListError(number, f"malformed address {address!r}")
        try:
            asn = int(asn)
        except ValueError:
            raise HitListError(number, f"malformed AS number {asn!r}")
        if asn <= 0:
            raise HitListError(number, f"AS number must be positive: {asn}")
        if not cc:
            raise HitListError(number, "missing country code")

        routable = topology is None or asn in topology.node_index
        entry = HitListEntry.construct(
            address=str(ip), cc=cc.upper(), asn=asn, routable=routable
        )
        if entry.network in seen:
            continue

        seen.add(entry.network)
        entries.append(entry)

    unroutable = sum(1 for entry in entries if not entry.routable)
    if unroutable:
        logger.warning("%d hit-list entries are unroutable", unroutable)

    return entries


def synthetic_hitlist(
    topology: AsTopology, size: int, seed: int = 1
) -> List[HitListEntry]:
    """Draw a hit list from the topology's vantage networks.

    Args:
        topology (AsTopology): the topology.
        size (int): the number of entries wanted.  Fewer are returned
                if the topology holds fewer vantage networks.
        seed (int): the seed of the draw.

    Returns:
        entries (list of HitListEntry): one per drawn network.

    """
    rng = random.Random(seed)
    pool = [
        (node, prefix)
        for node in topology.nodes
        for prefix in node.vantage_prefixes
    ]
    if size > len(pool):
        logger.warning(
            "only %d vantage networks available, %d requested",
            len(pool),
            size,
        )

    entries = []
    for node, prefix in rng.sample(pool, min(size, len(pool))):
        base, length = prefix.split("/")
        start = ipaddress.ip_address(base)
        size_bits = start.max_prefixlen - int(length)
        host = rng.randint(1, min(254, 2**size_bits - 2))
        countries = REGION_COUNTRIES.get(node.region, DEFAULT_COUNTRIES)
        entries.append(
            HitListEntry.construct(
                address=str(start + host),
                cc=countries[node.asn % len(countries)],
                asn=node.asn,
                routable=True,
            )
        )

    return entries


def write_hitlist(entries: Iterable[HitListEntry], sink: TextIO) -> int:
    """Write a hit list as CSV, returning the number of rows."""
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(HEADER)
    count = 0
    for entry in entries:
        writer.writerow((entry.address, entry.cc, entry.asn))
        count += 1
    return count
