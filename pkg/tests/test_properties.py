"""Seeded property checks over small generated topologies.

Each property runs over a thousand generated cases; the equivalence
with the exhaustive oracle runs over a hundred.

"""

import random

import pytest

from anylab.analysis import catchment_summary, ttl_distribution
from anylab.controller import ControlState
from anylab.errors import CapabilityError
from anylab.probe import (
    MeasurementPlan,
    ReplyRecord,
    run_measurement,
    synthetic_hitlist,
)
from anylab.routing import (
    Announcement,
    Community,
    brute_force_rib,
    catchment,
    forward_path,
    propagate,
)
from anylab.routing.engine import Origin, propagate_prefix, unicast_routes
from anylab.topology import AsTopology, Policy, Role, random_topology

CASES = 1000
PREFIXES = ("10.0.0.0/16", "10.0.0.0/24")
COMMUNITIES = (
    "noPeer",
    "noExport",
    "noClient",
    "prepend:1",
    "selectivePrepend:{asn}:2",
    "advertiseOnly:{asn}",
    "advertiseExcept:{asn}",
)
RANK = {Role.PROVIDER: 0, Role.PEER: 1, Role.IXP: 1, Role.CUSTOMER: 2}


def random_announcements(rng, topology, count=None):
    """Draw up to three announcements on distinct (site, prefix) pairs."""
    pairs = [
        (site.site_id, prefix)
        for site in topology.sites
        for prefix in PREFIXES
    ]
    count = count if count is not None else rng.randint(1, 3)
    asns = sorted(topology.node_index)
    announcements = []
    for site_id, prefix in rng.sample(pairs, min(count, len(pairs))):
        host = topology.site(site_id).host_asn
        communities = set()
        if rng.random() < 0.5:
            text = rng.choice(COMMUNITIES).format(asn=rng.choice(asns))
            communities.add(Community.parse(text))

        others = [asn for asn in asns if asn != host]
        poison = set()
        if others and rng.random() < 0.2:
            poison.add(rng.choice(others))

        announcements.append(
            Announcement(
                site_id=site_id,
                prefix=prefix,
                origin_prepend=rng.randint(0, 2),
                poisoned_asns=frozenset(poison),
                communities=frozenset(communities),
            )
        )

    return announcements


def test_oracle_equivalence():
    """Propagation matches the exhaustive enumeration."""
    for seed in range(100):
        rng = random.Random(seed)
        topology = random_topology(rng, sites=3)
        announcements = random_announcements(rng, topology)
        assert propagate(topology, announcements) == brute_force_rib(
            topology, announcements
        ), f"seed {seed}"


def test_unicast_routes_match_the_engine():
    """The three-pass unicast routes are the converged ones."""
    for seed in range(CASES):
        rng = random.Random(seed)
        topology = random_topology(rng, sites=1)
        for node in topology.nodes:
            origin = Origin(node.asn, None, (node.asn,))
            converged = propagate_prefix(topology, f"AS{node.asn}", [origin])
            assert unicast_routes(topology, node.asn) == converged, (
                f"seed {seed}, AS{node.asn}"
            )


def test_unicast_routes_on_the_fixture(fixture_topology):
    """The fixture's unicast routes match the engine too."""
    asns = sorted(fixture_topology.node_index)
    for asn in asns[:3] + asns[-3:] + [1133, 20473]:
        converged = propagate_prefix(
            fixture_topology, f"AS{asn}", [Origin(asn, None, (asn,))]
        )
        assert unicast_routes(fixture_topology, asn) == converged
        assert len(converged) == len(asns)


def test_valley_free_and_loop_free():
    """Selected paths are valley-free and never loop."""
    for seed in range(CASES):
        rng = random.Random(seed)
        topology = random_topology(rng, sites=rng.randint(1, 3))
        rib = propagate(topology, random_announcements(rng, topology))
        for (asn, prefix), entry in rib.entries.items():
            assert asn not in entry.as_path
            if entry.is_origin:
                continue

            hops = [asn] + forward_path(rib, asn, prefix)
            assert len(set(hops)) == len(hops)
            ranks = [
                RANK[topology.role(here, there)]
                for here, there in zip(hops, hops[1:])
            ]
            assert ranks == sorted(ranks), f"seed {seed}: {hops}"
            assert ranks.count(1) <= 1, f"seed {seed}: {hops}"


def test_determinism_under_permutation():
    """Neither the input order nor the worker count changes the routes."""
    for seed in range(CASES):
        rng = random.Random(seed)
        topology = random_topology(rng, sites=3)
        announcements = random_announcements(rng, topology)
        expected = propagate(topology, announcements)

        nodes = list(topology.nodes)
        links = list(topology.links)
        sites = list(topology.sites)
        for items in (nodes, links, sites, announcements):
            rng.shuffle(items)
        shuffled = AsTopology(
            nodes=tuple(nodes),
            links=tuple(links),
            sites=tuple(sites),
            anycast_prefixes=topology.anycast_prefixes,
        )
        workers = rng.choice((1, 2, 4))
        assert (
            propagate(shuffled, announcements, workers=workers) == expected
        ), f"seed {seed}"


def test_withdraw_completeness():
    """Withdrawn sites vanish from every route."""
    for seed in range(CASES):
        rng = random.Random(seed)
        topology = random_topology(rng, sites=3)
        state = ControlState(topology)
        announcements = random_announcements(rng, topology)
        for announcement in announcements:
            state.announce(
                announcement.site_id,
                announcement.prefix,
                prepend=announcement.origin_prepend,
                communities=announcement.communities,
                poison=announcement.poisoned_asns,
            )

        gone = rng.choice(announcements).site_id
        for site_id, prefix in list(state.announcements):
            if site_id == gone:
                state.withdraw(site_id, prefix)

        rib = state.rib()
        assert all(
            entry.origin_site_id != gone for entry in rib.entries.values()
        )

        for site_id, prefix in list(state.announcements):
            state.withdraw(site_id, prefix)
        assert state.snapshot() == ()
        assert state.rib().entries == {}


def test_no_export_confinement():
    """noExport routes stop at the announcing AS's neighbors."""
    community = Community.parse("noExport")
    for seed in range(CASES):
        rng = random.Random(seed)
        topology = random_topology(rng, sites=1)
        site = topology.sites[0]
        announcement = Announcement(
            site_id=site.site_id,
            prefix=PREFIXES[0],
            origin_prepend=rng.randint(0, 2),
            communities=frozenset({community}),
        )
        rib = propagate(topology, [announcement])
        neighbors = {nbr.asn for nbr in topology.neighbors(site.host_asn)}
        holders = {asn for asn, _ in rib.entries}
        assert holders == neighbors | {site.host_asn}
        for asn in neighbors:
            assert rib.get(asn, PREFIXES[0]).next_hop_asn == site.host_asn


def test_prepend_monotonicity():
    """With uniform relationships, prepending never grows a catchment."""
    prefix = PREFIXES[0]
    for seed in range(CASES):
        rng = random.Random(seed)
        relationship = rng.choice(("p2p", "ixp"))
        topology = random_topology(
            rng, sites=rng.randint(2, 3), relationships=(relationship,)
        )
        site = rng.choice(topology.sites)
        others = [
            Announcement(site_id=other.site_id, prefix=prefix)
            for other in topology.sites
            if other != site
        ]
        previous = None
        for prepend in range(4):
            announcement = Announcement(
                site_id=site.site_id, prefix=prefix, origin_prepend=prepend
            )
            rib = propagate(topology, others + [announcement])
            caught = {
                asn
                for asn, site_id in catchment(rib, prefix).items()
                if site_id == site.site_id
            }
            if previous is not None:
                assert caught <= previous, f"seed {seed}"
            previous = caught


def test_pinger_independence():
    """Who probes changes the RTT, never where the reply lands."""
    prefix = PREFIXES[0]
    for seed in range(CASES):
        rng = random.Random(seed)
        topology = random_topology(rng, sites=2, relationships=("c2p",))
        rib = propagate(
            topology,
            [
                Announcement(site_id=site.site_id, prefix=prefix)
                for site in topology.sites
            ],
        )
        hitlist = tuple(synthetic_hitlist(topology, 8, seed=seed))
        triples = []
        for site in topology.sites:
            plan = MeasurementPlan(
                hitlist=hitlist,
                pinger_sites=(site.site_id,),
                anycast_prefix=prefix,
            )
            records = run_measurement(topology, rib, plan)
            assert len(records) == len(hitlist)
            triples.append(
                {
                    (record.site, record.target_ip, record.ttl)
                    for record in records
                }
            )

        assert triples[0] == triples[1], f"seed {seed}"


def test_conservation():
    """Histograms and catchment counts add up to the record count."""
    sites = ("au-syd", "br-poa", "nl-ens", "us-los")
    for seed in range(CASES):
        rng = random.Random(seed)
        records = [
            ReplyRecord.construct(
                site=rng.choice(sites),
                time_diff_ms=rng.uniform(1, 300),
                target_ip=f"1.0.{index}.1",
                anycast_ip="145.100.118.1",
                ttl=rng.randint(40, 64),
                cc="NL",
                asn=rng.randint(1, 10),
            )
            for index in range(rng.randint(0, 50))
        ]
        report = catchment_summary(records)
        histogram = ttl_distribution(records)
        assert sum(histogram.values()) == len(records)
        assert report.total == len(records)
        assert sum(row.reply_count for row in report.rows) == len(records)
        if report.rows:
            percents = sum(row.percent for row in report.rows)
            assert 100 - (len(report.rows) - 1) <= percents <= 100


FULL = {
    Policy.PREPEND,
    Policy.NO_PEER,
    Policy.NO_EXPORT,
    Policy.SELECTIVE_PREPEND,
    Policy.SELECTIVE_ADVERTISE,
}
CAPABILITY_GRID = {
    "nl-arn": {Policy.PREPEND},
    "dk-cop": {Policy.PREPEND},
    "nl-ens": {Policy.PREPEND},
    "br-gru": FULL | {Policy.NO_CLIENT},
    "jp-hnd": {Policy.PREPEND},
    "uk-lnd": FULL,
    "us-los": {Policy.PREPEND},
    "us-mia": FULL | {Policy.NO_CLIENT},
    "fr-par": FULL,
    "br-poa": FULL,
    "au-syd": FULL,
    "us-was": {Policy.PREPEND},
}
POLICY_COMMUNITIES = {
    Policy.PREPEND: "prepend:1",
    Policy.NO_PEER: "noPeer",
    Policy.NO_EXPORT: "noExport",
    Policy.NO_CLIENT: "noClient",
    Policy.SELECTIVE_PREPEND: "selectivePrepend:20473:1",
    Policy.SELECTIVE_ADVERTISE: "advertiseOnly:20473",
}


@pytest.mark.parametrize("site_id", sorted(CAPABILITY_GRID))
@pytest.mark.parametrize("policy", list(Policy))
def test_capability_matrix(fixture_topology, site_id, policy):
    """Each site accepts exactly the communities its upstream honors."""
    state = ControlState(fixture_topology)
    community = POLICY_COMMUNITIES[policy]
    if policy in CAPABILITY_GRID[site_id]:
        state.announce(site_id, "145.100.118.0/23", communities=[community])
        assert len(state.snapshot()) == 1
    else:
        with pytest.raises(CapabilityError) as info:
            state.announce(
                site_id, "145.100.118.0/23", communities=[community]
            )
        assert info.value.policy == policy.value
        assert info.value.site_id == site_id
        assert state.snapshot() == ()
        assert state.log[-1].failed
