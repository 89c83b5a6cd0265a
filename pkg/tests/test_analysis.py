import random

import pytest

from anylab.analysis import (
    GroupBy,
    catchment_from_counts,
    catchment_summary,
    load_estimate,
    render_rtt,
    render_ttl,
    rtt_aggregate,
    rtt_csv,
    ttl_csv,
    ttl_distribution,
)
from anylab.probe import HitListEntry, ReplyRecord


def _reply(site, time_diff=10.0, target="1.1.1.2", ttl=60, cc="NL", asn=1):
    return ReplyRecord(
        site=site,
        time_diff_ms=time_diff,
        target_ip=target,
        anycast_ip="145.100.118.1",
        ttl=ttl,
        cc=cc,
        asn=asn,
    )


def test_catchment_listing():
    """A six-site catchment renders with truncated percents."""
    report = catchment_from_counts(
        {
            "jp-hnd": 321,
            "fr-par": 473867,
            "us-los": 1342542,
            "au-syd": 85475,
            "uk-lnd": 1123535,
            "us-mia": 541846,
        }
    )
    assert report.total == 3567586
    assert report.render() == (
        "# sites| replies -  percentual\n"
        "\n"
        "us-los | 1342542 -  37\n"
        "uk-lnd | 1123535 -  31\n"
        "us-mia |  541846 -  15\n"
        "fr-par |  473867 -  13\n"
        "au-syd |   85475 -   2\n"
        "jp-hnd |     321 -   0\n"
        "\n"
    )
    assert sum(row.percent for row in report.rows) == 98
    assert report.to_csv().splitlines()[:2] == [
        "site,count,percent",
        "us-los,1342542,37",
    ]


def test_catchment_single_site():
    """Everything at one site is 100 percent."""
    report = catchment_summary([_reply("au-syd")] * 4)
    (row,) = report.rows
    assert (row.site_id, row.reply_count, row.percent) == ("au-syd", 4, 100)
    assert report.render().endswith("au-syd | 4 - 100\n\n")


def test_catchment_empty():
    """No replies, no rows."""
    report = catchment_summary([])
    assert report.total == 0
    assert report.rows == ()
    assert report.render() == "# sites| replies -  percentual\n\n"


def test_catchment_ties():
    """Equal counts are ordered by site."""
    report = catchment_summary(
        [_reply("us-mia"), _reply("br-poa"), _reply("br-poa")]
        + [_reply("au-syd")]
    )
    assert [row.site_id for row in report.rows] == [
        "br-poa",
        "au-syd",
        "us-mia",
    ]


def test_ttl_distribution():
    """The TTL histogram is exact and ordered."""
    records = [_reply("au-syd", ttl=ttl) for ttl in (52, 60, 52, 63)]
    histogram = ttl_distribution(records)
    assert histogram == {52: 2, 60: 1, 63: 1}
    assert list(histogram) == [52, 60, 63]
    assert render_ttl(histogram) == "# ttl | replies\n52 | 2\n60 | 1\n63 | 1\n"
    assert ttl_csv(histogram) == "ttl,count\n52,2\n60,1\n63,1\n"
    assert ttl_distribution([]) == {}


def test_rtt_single_record():
    """One record is its own minimum, median and maximum."""
    (row,) = rtt_aggregate(
        [_reply("au-syd", time_diff=97.191805, cc="AU")],
        GroupBy.SITE_COUNTRY,
    )
    assert row.group == "au-syd/AU"
    assert row.count == 1
    assert row.min == row.median == row.mean == row.p95 == row.max
    assert row.mean == pytest.approx(97.191805)


def test_rtt_mean():
    """The mean of 10 and 20 is 15."""
    records = [
        _reply("us-los", time_diff=10.0, target="1.0.0.1"),
        _reply("us-los", time_diff=20.0, target="1.0.1.1"),
    ]
    (row,) = rtt_aggregate(records)
    assert row.mean == 15.0
    assert row.median == 10.0
    assert row.p95 == 20.0
    assert (row.min, row.max) == (10.0, 20.0)

    assert render_rtt([row]) == (
        "# group | count - min / median / mean / p95 / max (ms)\n"
        "us-los | 2 - 10.000 / 10.000 / 15.000 / 20.000 / 20.000\n"
    )
    assert rtt_csv([row]).splitlines()[1] == (
        "us-los,2,10.000000,10.000000,15.000000,20.000000,20.000000"
    )


def test_rtt_grouping():
    """Records group by site, country or both."""
    records = [
        _reply("us-los", cc="US"),
        _reply("us-los", cc="MX"),
        _reply("uk-lnd", cc="US"),
    ]
    assert [row.group for row in rtt_aggregate(records)] == [
        "uk-lnd",
        "us-los",
    ]
    assert [row.group for row in rtt_aggregate(records, "country")] == [
        "MX",
        "US",
    ]
    assert [
        row.count for row in rtt_aggregate(records, GroupBy.SITE_COUNTRY)
    ] == [1, 1, 1]


def test_load_split():
    """Networks split between sites as their ASes do."""
    mapping = {1: "us-los", 2: "uk-lnd"}
    hitlist = [
        HitListEntry(address=f"1.0.{index}.1", cc="US", asn=1)
        for index in range(6)
    ] + [
        HitListEntry(address=f"2.0.{index}.1", cc="GB", asn=2)
        for index in range(4)
    ]
    estimate = load_estimate(mapping, hitlist)
    assert estimate.networks == {"us-los": 6, "uk-lnd": 4}
    assert estimate.total == 10
    assert estimate.share("us-los") == pytest.approx(0.6)
    assert estimate.unmapped == 0
    assert estimate.uniform_traffic
    assert "us-los | 6 - 60.00%" in estimate.render()
    assert estimate.to_csv().splitlines()[1] == "us-los,6,0.600000"


def test_load_one_site():
    """A mapping to one site gives it the whole load."""
    mapping = {1: "au-syd", 2: "au-syd"}
    hitlist = [
        HitListEntry(address="1.0.0.1", cc="AU", asn=1),
        HitListEntry(address="1.0.0.9", cc="AU", asn=1),
        HitListEntry(address="2.0.0.1", cc="AU", asn=2),
        HitListEntry(address="3.0.0.1", cc="AU", asn=3),
        HitListEntry(address="4.0.0.1", cc="AU", asn=2, routable=False),
    ]
    estimate = load_estimate(mapping, hitlist)
    assert estimate.networks == {"au-syd": 2}
    assert estimate.share("au-syd") == 1.0
    assert estimate.unmapped == 2


def test_load_empty_hitlist():
    """Every site of the mapping is listed, even without networks."""
    estimate = load_estimate({1: "au-syd", 2: "us-los"}, [])
    assert estimate.networks == {"au-syd": 0, "us-los": 0}
    assert estimate.total == 0
    assert estimate.share("au-syd") == 0.0


def test_reports_ignore_order():
    """Permuting the records leaves every report unchanged."""
    rng = random.Random(11)
    sites = ("au-syd", "us-los", "uk-lnd")
    records = [
        _reply(
            rng.choice(sites),
            time_diff=rng.uniform(1, 300),
            target=f"10.{index // 256}.{index % 256}.1",
            ttl=rng.randint(40, 64),
            cc=rng.choice(("NL", "US", "AU")),
        )
        for index in range(500)
    ]
    shuffled = list(records)
    rng.shuffle(shuffled)

    assert catchment_summary(shuffled) == catchment_summary(records)
    assert ttl_distribution(shuffled) == ttl_distribution(records)
    for group_by in GroupBy:
        first = rtt_aggregate(records, group_by)
        second = rtt_aggregate(shuffled, group_by)
        assert [row.group for row in first] == [row.group for row in second]
        for one, two in zip(first, second):
            assert one.median == two.median
            assert one.p95 == two.p95
            assert one.mean == pytest.approx(two.mean)
