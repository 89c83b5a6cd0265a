import pytest

from anylab.errors import CapabilityError, NoRouteError, PrefixError
from anylab.routing import (
    Announcement,
    Community,
    CommunityKind,
    brute_force_rib,
    catchment,
    forward_path,
    poisoned_reachability,
    propagate,
    resolve,
    unicast_path,
    unicast_routes,
)
from anylab.routing.rib import ORIGIN_PREF
from anylab.topology import Role, load_topology

PREFIX = "10.0.0.0/16"

TWO_SITES = """
# 1 and 4 host sites; 2 and 3 buy transit from both.
as 1 west site=aa-aaa
as 2 left
as 3 right
as 4 east site=bb-bbb
link 2 1 c2p lat=1
link 3 1 c2p lat=1
link 2 4 c2p lat=1
link 3 4 c2p lat=1
prefix 10.0.0.0/16
cap aa-aaa Prepend,noPeer,noExport,SelectiveAdvertise
cap bb-bbb Prepend
"""


def _announce(site_id="aa-aaa", prefix=PREFIX, **kwargs):
    return Announcement(site_id=site_id, prefix=prefix, **kwargs)


def test_chain(chain):
    """Routes climb the chain of providers."""
    rib = propagate(chain, [_announce()])
    assert rib.get(3, PREFIX).as_path == (2, 1)
    assert rib.get(2, PREFIX).as_path == (1,)
    assert rib.get(2, PREFIX).learned_from is Role.CUSTOMER
    assert rib.get(2, PREFIX).local_pref == 200

    origin = rib.get(1, PREFIX)
    assert origin.is_origin
    assert origin.as_path == ()
    assert origin.local_pref == ORIGIN_PREF
    assert forward_path(rib, 3, PREFIX) == [2, 1]
    assert forward_path(rib, 1, PREFIX) == []


def test_origin_prepend(chain):
    """Prepending repeats the origin in every path."""
    rib = propagate(chain, [_announce(origin_prepend=2)])
    assert rib.get(3, PREFIX).as_path == (2, 1, 1, 1)


def test_diamond_tie_break(diamond):
    """Equal routes are broken by the lowest next hop."""
    rib = propagate(diamond, [_announce()])
    assert rib.get(4, PREFIX).next_hop_asn == 2
    assert forward_path(rib, 4, PREFIX) == [2, 1]
    assert rib == brute_force_rib(diamond, [_announce()])


def test_poison(chain):
    """A poisoned AS rejects the route, others keep it."""
    announcement = _announce(poisoned_asns=frozenset({3}))
    rib = poisoned_reachability(chain, announcement)
    assert rib.get(3, PREFIX) is None
    assert rib.get(2, PREFIX).as_path == (1, 3, 1)
    with pytest.raises(NoRouteError):
        forward_path(rib, 3, PREFIX)


def test_poison_the_only_transit(chain):
    """Poisoning a stub's only transit cuts the stub off."""
    rib = propagate(chain, [_announce(poisoned_asns=frozenset({2}))])
    assert rib.get(2, PREFIX) is None
    assert rib.get(3, PREFIX) is None


def test_poison_off_path():
    """Poisoning an AS on no selected path changes no catchment."""
    topology = load_topology(TWO_SITES + "as 5 aside\nlink 5 4 c2p\n")
    plain = propagate(topology, [_announce()])
    poisoned = propagate(topology, [_announce(poisoned_asns=frozenset({5}))])
    assert catchment(plain, PREFIX) == catchment(poisoned, PREFIX)


def test_no_export(chain):
    """noExport stops the route at the direct upstream."""
    community = Community(kind=CommunityKind.NO_EXPORT)
    rib = propagate(chain, [_announce(communities=frozenset({community}))])
    assert rib.get(2, PREFIX) is not None
    assert rib.get(3, PREFIX) is None


def test_prepend_community(chain):
    """A prepend community inflates the upstream's own hop."""
    community = Community.parse("prepend:2")
    rib = propagate(chain, [_announce(communities=frozenset({community}))])
    assert rib.get(3, PREFIX).as_path == (2, 2, 2, 1)
    assert rib.get(2, PREFIX).as_path == (1,)


def test_selective_prepend(diamond):
    """Selective prepending only inflates the path toward one AS."""
    community = Community.parse("selectivePrepend:4:3")
    rib = propagate(diamond, [_announce(communities=frozenset({community}))])
    assert rib.get(4, PREFIX).as_path == (2, 2, 2, 2, 1)
    assert rib == brute_force_rib(
        diamond, [_announce(communities=frozenset({community}))]
    )


def test_advertise_only(diamond):
    """Only the named AS receives the route from the upstreams."""
    community = Community.parse("advertiseOnly:3")
    rib = propagate(diamond, [_announce(communities=frozenset({community}))])
    assert rib.get(2, PREFIX).as_path == (1,)
    assert rib.get(4, PREFIX) is None


def test_two_sites():
    """Each AS reaches the best site, prepending shifts the catchment."""
    topology = load_topology(TWO_SITES)
    both = [_announce(), _announce("bb-bbb")]
    rib = propagate(topology, both)
    assert catchment(rib, PREFIX) == {
        1: "aa-aaa",
        2: "aa-aaa",
        3: "aa-aaa",
        4: "bb-bbb",
    }

    rib = propagate(topology, [_announce(origin_prepend=1), both[1]])
    assert catchment(rib, PREFIX) == {
        1: "aa-aaa",
        2: "bb-bbb",
        3: "bb-bbb",
        4: "bb-bbb",
    }


def test_withdrawn_site_has_no_catchment():
    """Once a site stops announcing, no AS maps to it."""
    topology = load_topology(TWO_SITES)
    rib = propagate(topology, [_announce("bb-bbb")])
    assert set(catchment(rib, PREFIX).values()) == {"bb-bbb"}


def test_longest_match():
    """A more specific prefix wins over the covering one."""
    topology = load_topology(TWO_SITES)
    rib = propagate(
        topology,
        [_announce(), _announce("bb-bbb", prefix="10.0.1.0/24")],
    )
    assert resolve(rib, 2, "10.0.1.9").origin_site_id == "bb-bbb"
    assert resolve(rib, 2, "10.0.2.9").origin_site_id == "aa-aaa"
    assert resolve(rib, 2, "192.0.2.1") is None
    # AS 1 holds no route to the /24 and falls back on the /16.
    expected = {1: "aa-aaa", 2: "bb-bbb", 3: "bb-bbb", 4: "bb-bbb"}
    assert catchment(rib, "10.0.1.0/24") == expected
    assert catchment(rib, "10.0.1.128/25") == expected
    assert set(catchment(rib, "10.0.2.0/24").values()) == {"aa-aaa"}


def test_invalid_announcements(chain):
    """Announcements are checked against the topology."""
    with pytest.raises(PrefixError):
        propagate(chain, [_announce(prefix="11.0.0.0/24")])
    with pytest.raises(PrefixError):
        propagate(chain, [_announce(poisoned_asns=frozenset({1}))])
    with pytest.raises(PrefixError):
        propagate(
            chain,
            [
                _announce(
                    communities=frozenset({Community.parse("advertiseOnly:9")})
                )
            ],
        )

    topology = load_topology(TWO_SITES)
    with pytest.raises(CapabilityError):
        propagate(
            topology,
            [
                _announce(
                    "bb-bbb",
                    communities=frozenset({Community.parse("noPeer")}),
                )
            ],
        )


def test_unicast(chain):
    """Unicast routes give the data-plane path between two ASes."""
    routes = unicast_routes(chain, 1)
    assert unicast_path(routes, 3, 1) == [2, 1]
    assert unicast_path(routes, 1, 1) == []


def test_idempotent(chain):
    """Propagating twice gives equal results."""
    announcements = [_announce(origin_prepend=1)]
    assert propagate(chain, announcements) == propagate(chain, announcements)


def test_equal_announcements_with_communities(chain):
    """Announcements carrying communities compare and hash by value."""
    first = _announce(
        communities=frozenset(
            {Community.parse("noPeer"), Community.parse("prepend:2")}
        )
    )
    second = _announce(
        communities=frozenset(
            {Community.parse("prepend:2"), Community.parse("noPeer")}
        )
    )
    assert first is not second
    assert first == second
    assert hash(first) == hash(second)
    assert len({first, second}) == 1
    assert first != _announce(communities=frozenset())

    rib = propagate(chain, [first, second])
    assert len(rib.announcements) == 1
    assert rib == propagate(chain, [second])


def test_rib_csv(chain):
    """The RIB exports as CSV, for debugging."""
    rib = propagate(chain, [_announce()])
    assert rib.to_csv() == (
        "asn,prefix,as_path,next_hop,origin_site\n"
        "1,10.0.0.0/16,,,aa-aaa\n"
        "2,10.0.0.0/16,1,1,aa-aaa\n"
        "3,10.0.0.0/16,2 1,2,aa-aaa\n"
    )


def test_community_text():
    """Communities parse from and print to the same text."""
    for text in (
        "prepend:3",
        "noPeer",
        "noExport",
        "noClient",
        "selectivePrepend:1251:2",
        "advertiseOnly:1251",
        "advertiseExcept:1251",
    ):
        assert str(Community.parse(text)) == text

    assert Community.parse("selectivePrepend:1251").count == 1
    for text in ("prepend", "prepend:0", "noPeer:3", "teleport", "x:y"):
        with pytest.raises(ValueError):
            Community.parse(text)
