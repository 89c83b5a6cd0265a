import io
import logging

import pytest

from anylab.errors import HitListError, UnknownSiteError
from anylab.probe import (
    HitListEntry,
    MeasurementPlan,
    estimate_duration,
    load_hitlist,
    pace_check,
    synthetic_hitlist,
    write_hitlist,
)
from anylab.probe.plan import DEFAULT_RATE_PPS

ANYCAST = "145.100.118.0/23"


def _plan(count=0, pingers=("nl-ens",), **kwargs):
    entry = HitListEntry(address="1.1.1.2", cc="AU", asn=13335)
    return MeasurementPlan.construct(
        hitlist=(entry,) * count,
        pinger_sites=pingers,
        rate_pps=kwargs.get("rate_pps", DEFAULT_RATE_PPS),
        anycast_prefix=ANYCAST,
        start_time=0,
    )


def test_load_hitlist():
    """Read the Sydney vantage point."""
    (entry,) = load_hitlist("1.1.1.2,AU,13335\n")
    assert entry.address == "1.1.1.2"
    assert entry.cc == "AU"
    assert entry.asn == 13335
    assert entry.routable
    assert entry.network == "1.1.1.0/24"


def test_hitlist_dedup():
    """One address per /24 (or /48), the first one wins."""
    entries = load_hitlist(
        "address,cc,asn\n"
        "# comment\n"
        "1.1.1.2,AU,13335\n"
        "1.1.1.200,AU,13335\n"
        "\n"
        "2001:db8:0:1::1,nl,1133\n"
        "2001:db8::1,NL,1133\n"
        "1.1.2.1,AU,13335\n"
    )
    assert [entry.address for entry in entries] == [
        "1.1.1.2",
        "2001:db8:0:1::1",
        "1.1.2.1",
    ]
    assert entries[1].cc == "NL"
    assert entries[1].network == "2001:db8::/48"


def test_empty_hitlist():
    """An empty file is an empty hit list."""
    assert load_hitlist("") == []


def test_hitlist_errors():
    """Malformed rows are reported with their line."""
    with pytest.raises(HitListError) as info:
        load_hitlist("1.1.1.2,AU,13335\n1.1.1.300,AU,13335\n")
    assert info.value.line == 2

    for row in ("1.1.1.2,AU", "1.1.1.2,AU,abc", "1.1.1.2,,5", "1.1.1.2,A,0"):
        with pytest.raises(HitListError):
            load_hitlist(row)


def test_unroutable_entries(chain):
    """Entries outside the topology are kept but flagged."""
    entries = load_hitlist("1.1.1.2,AU,13335\n192.168.1.1,NL,1\n", chain)
    assert [entry.routable for entry in entries] == [False, True]


def test_synthetic_hitlist(fixture_topology):
    """Synthetic hit lists are drawn from vantage networks."""
    entries = synthetic_hitlist(fixture_topology, 500, seed=7)
    assert len(entries) == 500
    assert len({entry.network for entry in entries}) == 500
    assert entries == synthetic_hitlist(fixture_topology, 500, seed=7)

    networks = {
        prefix: node.asn
        for node in fixture_topology.nodes
        for prefix in node.vantage_prefixes
    }
    for entry in entries:
        assert networks[entry.network] == entry.asn


def test_synthetic_hitlist_is_bounded(chain):
    """A small topology gives what it has."""
    assert len(synthetic_hitlist(chain, 100)) == 3


def test_write_hitlist(chain):
    """Written hit lists read back the same."""
    entries = synthetic_hitlist(chain, 3, seed=2)
    sink = io.StringIO()
    assert write_hitlist(entries, sink) == 3
    assert load_hitlist(sink.getvalue(), chain) == entries


def test_duration():
    """The default rate probes 6.5 million addresses in half an hour."""
    assert estimate_duration(_plan(6_500_000)) == 1800
    assert estimate_duration(_plan(6_500_000, ("nl-ens", "us-los"))) == 900
    assert estimate_duration(_plan(0)) == 0


def test_pace(caplog):
    """Aggressive plans get an advisory."""
    assert pace_check(_plan()) is None

    with caplog.at_level(logging.WARNING):
        advisory = pace_check(_plan(rate_pps=50_000))
    assert "10000" in advisory
    assert "10000" in caplog.text

    assert pace_check(_plan(), threshold=0) is not None


def test_plan_validation(chain):
    """Plans need pingers, a positive rate and known sites."""
    with pytest.raises(ValueError):
        MeasurementPlan(pinger_sites=(), anycast_prefix=ANYCAST)
    with pytest.raises(ValueError):
        MeasurementPlan(
            pinger_sites=("aa-aaa",), rate_pps=0, anycast_prefix=ANYCAST
        )

    plan = MeasurementPlan(pinger_sites=("zz-zzz",), anycast_prefix=ANYCAST)
    assert plan.anycast_ip == "145.100.118.1"
    with pytest.raises(UnknownSiteError):
        plan.check(chain)
