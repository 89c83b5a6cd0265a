import io
import time

import pytest

from anylab.analysis import (
    catchment_summary,
    load_estimate,
    rtt_aggregate,
    ttl_distribution,
)
from anylab.cli import read_replies_csv, write_replies_csv
from anylab.errors import EmptyCatchmentError
from anylab.probe import (
    HitListEntry,
    MeasurementPlan,
    run_measurement,
    synthetic_hitlist,
)
from anylab.routing import (
    Announcement,
    catchment,
    forward_path,
    propagate,
    unicast_path,
    unicast_routes,
)
from anylab.topology import load_topology

ANYCAST = "145.100.118.0/23"
VP = HitListEntry(address="1.1.1.2", cc="AU", asn=13335)


def _sydney_chain():
    """A VP twelve AS hops below the au-syd host."""
    chain = [13335] + [101 + index for index in range(11)] + [65001]
    lines = [
        "as 13335 Cloudflare access=0.5",
        "as 65001 syd-host site=au-syd",
        f"prefix {ANYCAST}",
        "cap au-syd Prepend",
    ]
    lines.extend(f"as {asn} transit{asn}" for asn in chain[1:-1])
    for index, (customer, provider) in enumerate(zip(chain, chain[1:])):
        latency = 4.0959025 if index == 0 else 4.0
        lines.append(f"link {customer} {provider} c2p lat={latency}")
    return load_topology("\n".join(lines) + "\n")


def _all_sites(topology, prefix=ANYCAST):
    return propagate(
        topology,
        [
            Announcement(site_id=site.site_id, prefix=prefix)
            for site in topology.sites
        ],
    )


def test_table_row():
    """The Sydney vantage point yields the expected reply record."""
    topology = _sydney_chain()
    rib = _all_sites(topology)
    plan = MeasurementPlan(
        hitlist=(VP,), pinger_sites=("au-syd",), anycast_prefix=ANYCAST
    )
    (record,) = run_measurement(topology, rib, plan)
    assert record.site == "au-syd"
    assert record.ttl == 52
    assert record.anycast_ip == "145.100.118.1"

    sink = io.StringIO()
    write_replies_csv([record], sink)
    assert sink.getvalue().splitlines()[1] == (
        "au-syd,97.191805,1.1.1.2,145.100.118.1,52,AU,13335"
    )


def test_replies_round_trip():
    """Replies written and read back are written identically."""
    topology = _sydney_chain()
    plan = MeasurementPlan(
        hitlist=(VP,), pinger_sites=("au-syd",), anycast_prefix=ANYCAST
    )
    records = run_measurement(topology, _all_sites(topology), plan)
    first = io.StringIO()
    write_replies_csv(records, first)
    second = io.StringIO()
    write_replies_csv(read_replies_csv(first.getvalue()), second)
    assert first.getvalue() == second.getvalue()


def test_vantage_point_in_the_site(chain):
    """A VP inside the catchment site only pays its access latency."""
    rib = propagate(
        chain, [Announcement(site_id="aa-aaa", prefix="10.0.0.0/16")]
    )
    entry = HitListEntry(address="1.0.0.9", cc="NL", asn=1)
    plan = MeasurementPlan(
        hitlist=(entry,),
        pinger_sites=("aa-aaa",),
        anycast_prefix="10.0.0.0/16",
    )
    (record,) = run_measurement(chain, rib, plan)
    assert record.time_diff_ms == 3.0
    assert record.ttl == 64
    assert record.anycast_ip == "10.0.0.1"

    sink = io.StringIO()
    write_replies_csv([record], sink)
    assert read_replies_csv(sink.getvalue()) == [record]


def test_no_announcement(chain):
    """Measuring a prefix nobody announces fails."""
    plan = MeasurementPlan(
        hitlist=(VP,), pinger_sites=("aa-aaa",), anycast_prefix="10.0.0.0/16"
    )
    rib = propagate(chain, [])
    with pytest.raises(EmptyCatchmentError):
        run_measurement(chain, rib, plan)


def test_unroutable_vantage_points(chain):
    """Unroutable VPs and the other family yield no record."""
    rib = propagate(
        chain, [Announcement(site_id="aa-aaa", prefix="10.0.0.0/16")]
    )
    hitlist = (
        HitListEntry(address="1.0.1.1", cc="NL", asn=2),
        HitListEntry(address="1.1.1.2", cc="AU", asn=13335),
        HitListEntry(address="9.9.9.9", cc="NL", asn=3, routable=False),
        HitListEntry(address="2001:db8::1", cc="NL", asn=3),
    )
    plan = MeasurementPlan(
        hitlist=hitlist,
        pinger_sites=("aa-aaa",),
        anycast_prefix="10.0.0.0/16",
    )
    records = run_measurement(chain, rib, plan)
    assert [record.target_ip for record in records] == ["1.0.1.1"]


def test_fixture_consistency(fixture_topology):
    """Every reply lands at the site routing maps its AS to."""
    rib = _all_sites(fixture_topology)
    hitlist = tuple(synthetic_hitlist(fixture_topology, 1000))
    plan = MeasurementPlan(
        hitlist=hitlist,
        pinger_sites=("nl-ens", "us-los"),
        anycast_prefix=ANYCAST,
    )
    records = run_measurement(fixture_topology, rib, plan)
    assert len(records) == len(hitlist)

    mapping = catchment(rib, ANYCAST)
    pingers = [
        fixture_topology.site(site_id).host_asn
        for site_id in plan.pinger_sites
    ]
    order = {entry.address: index for index, entry in enumerate(hitlist)}
    unicast = {}
    for record in records:
        assert record.site == mapping[record.asn]

        # The round trip decomposes into the two legs.
        reply = forward_path(rib, record.asn, ANYCAST)
        pinger = pingers[order[record.target_ip] % len(pingers)]
        if record.asn not in unicast:
            unicast[record.asn] = unicast_routes(fixture_topology, record.asn)
        out = unicast_path(unicast[record.asn], pinger, record.asn)
        access = fixture_topology.node(record.asn).access_ms
        expected = (
            fixture_topology.path_latency([pinger] + out)
            + fixture_topology.path_latency([record.asn] + reply)
            + 2 * access
        )
        assert record.time_diff_ms == pytest.approx(expected, abs=1e-6)
        assert record.ttl == 64 - len(reply)
        assert 0 < record.ttl <= 64


def test_workers_and_repeats(fixture_topology):
    """Results do not depend on the worker count or the run."""
    rib = _all_sites(fixture_topology)
    plan = MeasurementPlan(
        hitlist=tuple(synthetic_hitlist(fixture_topology, 300, seed=5)),
        pinger_sites=("br-gru",),
        anycast_prefix=ANYCAST,
    )
    single = run_measurement(fixture_topology, rib, plan)
    assert run_measurement(fixture_topology, rib, plan, workers=4) == single
    assert run_measurement(fixture_topology, rib, plan) == single


def test_loss(fixture_topology):
    """Seeded loss drops the same replies every time."""
    rib = _all_sites(fixture_topology)
    plan = MeasurementPlan(
        hitlist=tuple(synthetic_hitlist(fixture_topology, 400)),
        pinger_sites=("nl-ens",),
        anycast_prefix=ANYCAST,
    )
    everything = run_measurement(fixture_topology, rib, plan)
    lossy = run_measurement(fixture_topology, rib, plan, loss=0.25, seed=3)
    assert 0 < len(lossy) < len(everything)
    assert set(r.target_ip for r in lossy) <= set(
        r.target_ip for r in everything
    )
    assert run_measurement(fixture_topology, rib, plan, loss=0.25, seed=3) == (
        lossy
    )
    assert run_measurement(fixture_topology, rib, plan, loss=1.0) == []


def test_end_to_end(fixture_topology):
    """Announce everywhere, measure 100,000 networks and report."""
    started = time.perf_counter()
    rib = _all_sites(fixture_topology)
    hitlist = tuple(synthetic_hitlist(fixture_topology, 100_000))
    assert len(hitlist) == 100_000
    plan = MeasurementPlan.construct(
        hitlist=hitlist,
        pinger_sites=("nl-ens",),
        rate_pps=3612,
        anycast_prefix=ANYCAST,
        start_time=0,
    )
    records = run_measurement(fixture_topology, rib, plan)
    assert len(records) == len(hitlist)

    mapping = catchment(rib, ANYCAST)
    assert all(record.site == mapping[record.asn] for record in records)

    report = catchment_summary(records)
    assert report.total == len(records)
    assert sum(ttl_distribution(records).values()) == len(records)
    assert sum(row.count for row in rtt_aggregate(records)) == len(records)
    estimate = load_estimate(mapping, hitlist)
    assert estimate.total == len(hitlist)
    assert estimate.unmapped == 0
    assert time.perf_counter() - started < 5.0
