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

"""Catchment measurement over the simulated data plane.

Pingers send echo requests to every vantage point of the hit list,
with the anycast address as source.  Each vantage point answers toward
the anycast address, so the reply lands at whichever site its AS
routes the anycast prefix to, regardless of which pinger probed it.

The time difference of a record is the triangular round trip: the
pinger-to-vantage-point leg plus the vantage-point-to-site leg.  Each
leg is the sum of the link latencies along the AS path, plus the
access latency of the vantage point's AS.  The TTL of a reply starts
at the initial TTL and loses one per AS crossed after the vantage
point's own.

"""

from concurrent.futures import ThreadPoolExecutor
import ipaddress
import logging
import random
from typing import Dict, List, Optional

from pydantic import Field, validator

from anylab.errors import EmptyCatchmentError, NoRouteError
from anylab.model import Model, lazy_property
from anylab.probe.hitlist import HitListEntry
from anylab.probe.plan import MeasurementPlan
from anylab.routing.engine import (
    forward_path,
    resolve,
    unicast_path,
    unicast_routes,
)
from anylab.routing.rib import RibSet
from anylab.topology.types import AsTopology

logger = logging.getLogger(__name__)

INITIAL_TTL = 64


class ReplyRecord(Model):

    """A reply received at an anycast site."""

    site: str
    time_diff_ms: float = Field(..., gt=0)
    target_ip: str
    anycast_ip: str
    ttl: int = Field(..., ge=0, le=255)
    cc: str
    asn: int

    @validator("target_ip", "anycast_ip")
    def _normalize(cls, value):
        return str(ipaddress.ip_address(value))

    @lazy_property
    def sort_key(self):
        target = ipaddress.ip_address(self.target_ip)
        return (self.site, target.version, int(target))


class _Reply:

    """The reply route of one AS: catchment site and hops."""

    __slots__ = ("site", "hops", "latency")

    def __init__(self, site, hops, latency):
        self.site = site
        self.hops = hops
        self.latency = latency


def run_measurement(
    topology: AsTopology,
    rib: RibSet,
    plan: MeasurementPlan,
    loss: float = 0.0,
    seed: int = 1,
    initial_ttl: int = INITIAL_TTL,
    workers: int = 1,
) -> List[ReplyRecord]:
    """Probe the hit list and collect the replies.

    Args:
        topology (AsTopology): the topology.
        rib (RibSet): the converged anycast routes.
        plan (MeasurementPlan): pingers, hit list and anycast prefix.
        loss (float): probability of losing a probe, drawn per
                vantage point from `seed`.
        seed (int): seed of the loss draw.
        initial_ttl (int): TTL of replies leaving a vantage point.
        workers (int): threads sharing the hit list.  The result never
                depends on it.

    Returns:
        records (list of ReplyRecord): one per vantage point that
                answered, sorted by site then target address.

    Raises:
        UnknownSiteError: a pinger site does not exist.
        EmptyCatchmentError: no site announces the anycast address.

    """
    plan.check(topology)
    anycast_ip = plan.anycast_ip
    if not any(
        resolve(rib, site.host_asn, anycast_ip) is not None
        for site in topology.sites
    ):
        raise EmptyCatchmentError(plan.anycast_prefix)

    pingers = [topology.site(site).host_asn for site in plan.pinger_sites]
    family = ipaddress.ip_address(anycast_ip).version
    jobs = [
        (entry, pingers[index % len(pingers)])
        for index, entry in enumerate(plan.hitlist)
        if entry.routable and entry.ip.version == family
    ]

    # Both legs depend on the vantage AS and the pinger only, so they
    # are computed once per pair before fanning out.
    vp_asns = sorted(
        {entry.asn for entry, _ in jobs if entry.asn in topology.node_index}
    )
    replies = {}
    for asn in vp_asns:
        reply = _reply_route(topology, rib, asn, anycast_ip)
        if reply is not None:
            replies[asn] = reply

    forward = {}
    for asn in replies:
        routes = unicast_routes(topology, asn)
        for pinger in set(pingers):
            try:
                out = unicast_path(routes, pinger, asn)
            except NoRouteError:
                continue
            forward[(asn, pinger)] = topology.path_latency([pinger] + out)

    def probe(chunk):
        records = []
        for entry, pinger in chunk:
            record = _probe(
                topology,
                entry,
                pinger,
                anycast_ip,
                forward,
                replies,
                loss,
                seed,
                initial_ttl,
            )
            if record is not None:
                records.append(record)
        return records

    if workers > 1 and len(jobs) > 1:
        chunks = [jobs[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(probe, chunks))
    else:
        results = [probe(jobs)]

    records = [record for result in results for record in result]
    records.sort(key=lambda record: record.sort_key)
    logger.info(
        "%d replies from %d probed vantage points",
        len(records),
        len(jobs),
    )
    return records


def _reply_route(topology, rib, asn, anycast_ip) -> Optional[_Reply]:
    route = resolve(rib, asn, anycast_ip)
    if route is None:
        return None

    hops = forward_path(rib, asn, route.prefix)
    latency = topology.path_latency([asn] + hops)
    return _Reply(route.origin_site_id, hops, latency)


def _probe(
    topology: AsTopology,
    entry: HitListEntry,
    pinger: int,
    anycast_ip: str,
    forward: Dict,
    replies: Dict,
    loss: float,
    seed: int,
    initial_ttl: int,
) -> Optional[ReplyRecord]:
    reply = replies.get(entry.asn)
    out = forward.get((entry.asn, pinger))
    if reply is None or out is None:
        return None

    if loss and random.Random(f"{seed}/{entry.address}").random() < loss:
        return None

    access = topology.node(entry.asn).access_ms
    time_diff = (out + access) + (reply.latency + access)
    return ReplyRecord.construct(
        site=reply.site,
        time_diff_ms=round(time_diff, 6),
        target_ip=entry.address,
        anycast_ip=anycast_ip,
        ttl=max(0, initial_ttl - len(reply.hops)),
        cc=entry.cc,
        asn=entry.asn,
    )
