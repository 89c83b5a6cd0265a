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

"""Measurement plans, their duration and their pace."""

import ipaddress
import logging
import math
from typing import Optional, Tuple

from pydantic import Field, validator

from anylab.model import Model
from anylab.probe.hitlist import HitListEntry
from anylab.topology.types import AsTopology

logger = logging.getLogger(__name__)

# 6,500,000 probes in 30 minutes from a single pinger, rounded up.
DEFAULT_RATE_PPS = 3612
DEFAULT_ABUSE_THRESHOLD_PPS = 10_000


class MeasurementPlan(Model):

    """Who probes what, and how fast."""

    hitlist: Tuple[HitListEntry, ...] = ()
    pinger_sites: Tuple[str, ...]
    rate_pps: int = Field(DEFAULT_RATE_PPS, gt=0)
    anycast_prefix: str
    start_time: int = 0

    @validator("anycast_prefix")
    def _normalize(cls, value):
        return str(ipaddress.ip_network(value, strict=True))

    @validator("pinger_sites")
    def _some_pingers(cls, value):
        if not value:
            raise ValueError("at least one pinger site is needed")
        return value

    @property
    def anycast_ip(self) -> str:
        """Return the service address: the prefix's first host."""
        network = ipaddress.ip_network(self.anycast_prefix)
        return str(network.network_address + 1)

    def check(self, topology: AsTopology):
        """Check that every pinger site exists.

        Raises:
            UnknownSiteError: a pinger site does not exist.

        """
        for site_id in self.pinger_sites:
            topology.site(site_id)


def estimate_duration(plan: MeasurementPlan) -> int:
    """Return the seconds needed to probe the whole hit list."""
    total = len(plan.hitlist)
    if not total:
        return 0

    return math.ceil(total / (plan.rate_pps * len(plan.pinger_sites)))


def pace_check(
    plan: MeasurementPlan, threshold: int = DEFAULT_ABUSE_THRESHOLD_PPS
) -> Optional[str]:
    """Warn when the aggregate probing rate looks abusive.

    Args:
        plan (MeasurementPlan): the plan.
        threshold (int): the highest acceptable aggregate rate.

    Returns:
        advisory (str or None): the warning, if any.

    """
    aggregate = plan.rate_pps * len(plan.pinger_sites)
    if aggregate <= threshold:
        return None

    advisory = (
        f"aggregate probing rate {aggregate} pps exceeds the threshold "
        f"of {threshold} pps"
    )
    logger.warning(advisory)
    return advisory
