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

"""Announcements: a site originating an anycast prefix."""

import ipaddress
from typing import FrozenSet, Tuple

from pydantic import Field, validator

from anylab.errors import CapabilityError, PrefixError
from anylab.model import Model
from anylab.routing.community import Community
from anylab.topology.types import AsTopology


class Announcement(Model):

    """A site's origination of a prefix.

    The announced AS path is the origin repeated `1 + origin_prepend`
    times.  Poisoned ASes are inserted right after the first copy of
    the origin, so that they reject the route when they receive it:
    poisoning AS 7 from AS 1 with two prepends announces `1 7 1 1 1`.

    """

    site_id: str
    prefix: str
    origin_prepend: int = Field(0, ge=0)
    poisoned_asns: FrozenSet[int] = frozenset()
    communities: FrozenSet[Community] = frozenset()

    @validator("prefix")
    def _normalize_prefix(cls, value):
        try:
            return str(ipaddress.ip_network(value, strict=True))
        except ValueError as err:
            raise ValueError(f"malformed prefix {value!r}: {err}")

    @property
    def network(self):
        return ipaddress.ip_network(self.prefix)

    @property
    def family(self) -> int:
        return self.network.version

    @property
    def sort_key(self):
        return (
            self.prefix,
            self.site_id,
            self.origin_prepend,
            sorted(self.poisoned_asns),
            sorted(str(community) for community in self.communities),
        )

    def announced_path(self, origin_asn: int) -> Tuple[int, ...]:
        """Return the AS path the origin sends to its neighbors."""
        prepends = (origin_asn,) * (1 + self.origin_prepend)
        if not self.poisoned_asns:
            return prepends

        return (origin_asn,) + tuple(sorted(self.poisoned_asns)) + prepends

    def describe(self) -> str:
        """Return a one-line description, used by status reports."""
        words = [self.prefix, f"prepend={self.origin_prepend}"]
        if self.communities:
            names = sorted(str(community) for community in self.communities)
            words.append("communities=" + ",".join(names))
        if self.poisoned_asns:
            poison = ",".join(str(asn) for asn in sorted(self.poisoned_asns))
            words.append(f"poison={poison}")
        return " ".join(words)


def check_announcement(topology: AsTopology, announcement: Announcement):
    """Check an announcement against a topology.

    Raises:
        UnknownSiteError: the site does not exist.
        PrefixError: the prefix is outside the anycast space, a
                poisoned AS is the origin itself or a community
                targets an unknown AS.
        CapabilityError: the site does not support a community.

    """
    site = topology.site(announcement.site_id)
    topology.covering_prefix(announcement.prefix)

    for community in sorted(announcement.communities, key=str):
        if not site.supports(community.policy):
            raise CapabilityError(community.policy.value, site.site_id)
        target = community.target_asn
        if target is not None and target not in topology.node_index:
            raise PrefixError(
                f"community {community} targets unknown AS{target}"
            )

    if site.host_asn in announcement.poisoned_asns:
        raise PrefixError(
            f"site {site.site_id} cannot poison its own AS{site.host_asn}"
        )
