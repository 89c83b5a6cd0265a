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

"""Community strings attached to an announcement.

A community is a label the announcing site attaches to its route.  The
upstream receiving the route directly from the site translates it into
an export policy: stop exporting altogether, skip peers, skip
customers, export to one AS only, prepend itself a few more times...

Communities have a text form, used in scenario files and in the
command log:

```
prepend:3  noPeer  noExport  noClient
selectivePrepend:1251:2  advertiseOnly:1251  advertiseExcept:1251
```

"""

from enum import Enum
from typing import Optional

from pydantic import root_validator

from anylab.model import Model
from anylab.topology.types import Policy, Role


class CommunityKind(str, Enum):

    """Kinds of community actions."""

    PREPEND = "prepend"
    NO_PEER = "noPeer"
    NO_EXPORT = "noExport"
    NO_CLIENT = "noClient"
    SELECTIVE_PREPEND = "selectivePrepend"
    ADVERTISE_ONLY = "advertiseOnly"
    ADVERTISE_EXCEPT = "advertiseExcept"


POLICIES = {
    CommunityKind.PREPEND: Policy.PREPEND,
    CommunityKind.NO_PEER: Policy.NO_PEER,
    CommunityKind.NO_EXPORT: Policy.NO_EXPORT,
    CommunityKind.NO_CLIENT: Policy.NO_CLIENT,
    CommunityKind.SELECTIVE_PREPEND: Policy.SELECTIVE_PREPEND,
    CommunityKind.ADVERTISE_ONLY: Policy.SELECTIVE_ADVERTISE,
    CommunityKind.ADVERTISE_EXCEPT: Policy.SELECTIVE_ADVERTISE,
}

COUNTED = {CommunityKind.PREPEND, CommunityKind.SELECTIVE_PREPEND}
TARGETED = {
    CommunityKind.SELECTIVE_PREPEND,
    CommunityKind.ADVERTISE_ONLY,
    CommunityKind.ADVERTISE_EXCEPT,
}


class Community(Model):

    """A community action.

    Prepend variants carry a count (1 or more), selective variants
    carry the target AS number.

    """

    kind: CommunityKind
    target_asn: Optional[int] = None
    count: int = 0

    @root_validator(skip_on_failure=True)
    def _check_arguments(cls, values):
        kind = values["kind"]
        if kind in COUNTED:
            if values["count"] < 1:
                raise ValueError(f"{kind.value} needs a count of at least 1")
        elif values["count"]:
            raise ValueError(f"{kind.value} takes no count")

        if kind in TARGETED:
            if values["target_asn"] is None:
                raise ValueError(f"{kind.value} needs a target AS")
        elif values["target_asn"] is not None:
            raise ValueError(f"{kind.value} takes no target AS")

        return values

    @classmethod
    def parse(cls, text: str) -> "Community":
        """Parse the text form of a community.

        Args:
            text (str): the community, like `noPeer` or
                    `selectivePrepend:1251:2`.  The count of
                    `selectivePrepend` defaults to 1.

        Raises:
            ValueError: the text is not a valid community.

        """
        name, *args = text.strip().split(":")
        kind = None
        for member in CommunityKind:
            if member.value.lower() == name.lower():
                kind = member
                break

        if kind is None:
            raise ValueError(f"unknown community: {text!r}")

        try:
            numbers = [int(arg) for arg in args]
        except ValueError:
            raise ValueError(f"malformed community: {text!r}")

        if kind is CommunityKind.PREPEND and len(numbers) == 1:
            return cls(kind=kind, count=numbers[0])
        if kind is CommunityKind.SELECTIVE_PREPEND and len(numbers) in (1, 2):
            count = numbers[1] if len(numbers) == 2 else 1
            return cls(kind=kind, target_asn=numbers[0], count=count)
        if kind in TARGETED and len(numbers) == 1:
            return cls(kind=kind, target_asn=numbers[0])
        if kind not in COUNTED | TARGETED and not numbers:
            return cls(kind=kind)

        raise ValueError(f"wrong arguments for {kind.value}: {text!r}")

    @property
    def policy(self) -> Policy:
        """Return the site capability this community needs."""
        return POLICIES[self.kind]

    def __str__(self):
        kind = self.kind
        if kind is CommunityKind.PREPEND:
            return f"{kind.value}:{self.count}"
        if kind is CommunityKind.SELECTIVE_PREPEND:
            return f"{kind.value}:{self.target_asn}:{self.count}"
        if kind in TARGETED:
            return f"{kind.value}:{self.target_asn}"
        return kind.value

    def permits(self, receiver: int, role: Role) -> bool:
        """May the upstream export the route to this neighbor?

        Args:
            receiver (int): the neighbor's AS number.
            role (Role): the role the neighbor plays for the upstream.

        """
        kind = self.kind
        if kind is CommunityKind.NO_EXPORT:
            return False
        if kind is CommunityKind.NO_PEER:
            return role not in (Role.PEER, Role.IXP)
        if kind is CommunityKind.NO_CLIENT:
            return role is not Role.CUSTOMER
        if kind is CommunityKind.ADVERTISE_ONLY:
            return receiver == self.target_asn
        if kind is CommunityKind.ADVERTISE_EXCEPT:
            return receiver != self.target_asn
        return True

    def extra_prepend(self, receiver: int) -> int:
        """Return how many more times the upstream prepends itself."""
        if self.kind is CommunityKind.PREPEND:
            return self.count
        if self.kind is CommunityKind.SELECTIVE_PREPEND:
            if receiver == self.target_asn:
                return self.count
        return 0
