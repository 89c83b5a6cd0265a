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

"""Routing information: best routes per AS and prefix."""

import csv
import io
import ipaddress
from typing import Dict, List, Optional, Tuple

from anylab.model import Model, lazy_property
from anylab.routing.announcement import Announcement
from anylab.topology.types import Role

ORIGIN_PREF = 300
LOCAL_PREF = {
    Role.CUSTOMER: 200,
    Role.PEER: 100,
    Role.IXP: 100,
    Role.PROVIDER: 50,
}

CSV_COLUMNS = ("asn", "prefix", "as_path", "next_hop", "origin_site")


class RibEntry(Model):

    """The best route an AS holds toward a prefix.

    `as_path` starts with the next hop and ends with the origin.  The
    origin's own entry has an empty path and no next hop.
    `learned_from` is the role of the next hop, seen from the holder.

    """

    asn: int
    prefix: str
    as_path: Tuple[int, ...] = ()
    next_hop_asn: Optional[int] = None
    origin_site_id: Optional[str] = None
    local_pref: int = ORIGIN_PREF
    learned_from: Optional[Role] = None

    @property
    def is_origin(self) -> bool:
        return self.next_hop_asn is None

    @property
    def origin_asn(self) -> int:
        return self.as_path[-1] if self.as_path else self.asn


class RibSet(Model):

    """Every best route, plus the announcements that produced them."""

    entries: Dict[Tuple[int, str], RibEntry] = {}
    announcements: Tuple[Announcement, ...] = ()

    @lazy_property
    def by_prefix(self) -> Dict[str, Dict[int, RibEntry]]:
        """Return the entries grouped by prefix, then by AS."""
        grouped = {}
        for (asn, prefix), entry in self.entries.items():
            grouped.setdefault(prefix, {})[asn] = entry
        return grouped

    @lazy_property
    def prefixes(self) -> Tuple[str, ...]:
        """Return the announced prefixes, most specific first."""
        networks = {
            ipaddress.ip_network(announcement.prefix)
            for announcement in self.announcements
        }
        ordered = sorted(
            networks,
            key=lambda net: (net.version, -net.prefixlen, net),
        )
        return tuple(str(net) for net in ordered)

    def get(self, asn: int, prefix: str) -> Optional[RibEntry]:
        return self.entries.get((asn, prefix))

    def routes(self, prefix: str) -> Dict[int, RibEntry]:
        """Return the entries toward a prefix, by holder."""
        return self.by_prefix.get(prefix, {})

    def announcing_sites(self, prefix: str) -> List[str]:
        return sorted(
            {
                announcement.site_id
                for announcement in self.announcements
                if announcement.prefix == prefix
            }
        )

    def to_csv(self) -> str:
        """Export the entries as CSV, sorted by prefix then AS."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for (asn, prefix), entry in sorted(
            self.entries.items(), key=lambda item: (item[0][1], item[0][0])
        ):
            writer.writerow(
                (
                    asn,
                    prefix,
                    " ".join(str(hop) for hop in entry.as_path),
                    "" if entry.next_hop_asn is None else entry.next_hop_asn,
                    entry.origin_site_id or "",
                )
            )
        return buffer.getvalue()
