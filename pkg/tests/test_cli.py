import pytest

from anylab.cli import main, read_replies_csv
from anylab.topology import load_topology

V4 = "145.100.118.0/23"


@pytest.fixture
def lab(tmp_path):
    """Global flags for a small fixture and a throw-away state."""
    return ["--stubs", "5", "--state", str(tmp_path / "state.sqlite")]


def test_help(capsys):
    """Help exits cleanly, for the command and its subcommands."""
    assert main(["--help"]) == 0
    assert "ctl" in capsys.readouterr().out
    for command in ("topo", "ctl", "scenario", "measure", "report"):
        assert main([command, "--help"]) == 0


def test_usage_errors(lab, capsys):
    """Conflicting or incomplete flags are usage errors."""
    assert main([]) == 2
    assert main(lab + ["ctl", "-4", "-A", "-W", "-t", "br-poa"]) == 2
    assert main(lab + ["ctl", "-4", "-6", "-S"]) == 2
    assert main(lab + ["ctl", "-W", "-t", "br-poa", "-P", "2"]) == 2
    assert main(lab + ["ctl", "-A", "-t", "br-poa", "-r", V4]) == 2
    assert main(lab + ["ctl", "-4", "-A", "-t", "br-poa"]) == 2
    assert main(lab + ["ctl"]) == 2
    assert "-A" in capsys.readouterr().err


def test_announce_and_status(lab, capsys):
    """Announce at br-poa, read the status, then withdraw."""
    command = ["ctl", "-4", "-A", "-t", "br-poa", "-r", V4, "-P", "20"]
    assert main(lab + command) == 0
    assert capsys.readouterr().out == f"announce br-poa {V4} prepend=20\n"

    assert main(lab + ["ctl", "-S"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert f"  {V4} prepend=20" in lines

    assert main(lab + ["ctl", "-4", "-W", "-t", "br-poa", "-r", V4]) == 0
    assert capsys.readouterr().out == f"withdraw br-poa {V4}: ok\n"
    assert main(lab + ["ctl", "-4", "-W", "-t", "br-poa", "-r", V4]) == 0
    assert capsys.readouterr().out == f"withdraw br-poa {V4}: no-op\n"


def test_domain_errors(lab, capsys):
    """Unsupported policies and unknown sites exit with 1."""
    command = ["ctl", "-4", "-A", "-t", "nl-ens", "-r", V4, "-C", "noPeer"]
    assert main(lab + command) == 1
    assert "noPeer" in capsys.readouterr().err
    assert main(lab + ["ctl", "-4", "-A", "-t", "xx-yyy", "-r", V4]) == 1


def test_reverse_prepend(lab, capsys):
    """Reverse prepending goes through the stored state."""
    for site in ("us-los", "uk-lnd"):
        assert main(lab + ["ctl", "-4", "-A", "-t", site, "-r", V4]) == 0
    command = ["ctl", "-4", "--reverse-prepend", "us-los", "-r", V4, "-P", "3"]
    assert main(lab + command) == 0
    capsys.readouterr()

    assert main(lab + ["ctl", "-S"]) == 0
    status = capsys.readouterr().out
    assert f"  {V4} prepend=3" in status.splitlines()


def test_topo(lab, tmp_path, capsys):
    """The fixture prints as a valid topology file."""
    assert main(lab + ["topo", "fixture"]) == 0
    source = capsys.readouterr().out
    topology = load_topology(source)
    assert len(topology.sites) == 12

    path = tmp_path / "lab.topo"
    path.write_text(source)
    assert main(lab + ["topo", "validate", str(path)]) == 0
    assert capsys.readouterr().out.splitlines()[-1].startswith("ok: ")

    broken = tmp_path / "broken.topo"
    broken.write_text(source + "as 99 lonely\n")
    assert main(lab + ["topo", "validate", str(broken)]) == 1
    assert "violation: " in capsys.readouterr().out

    assert main(lab + ["topo", "show"]) == 0
    out = capsys.readouterr().out
    assert "br-poa AS" in out
    assert f"prefix {V4} (IPv4)" in out


def test_scenario(lab, tmp_path, capsys):
    """Scenarios print each command with its outcome."""
    script = tmp_path / "experiment.txt"
    script.write_text(
        f"1 announce us-los {V4}\n"
        f"2 announce uk-lnd {V4} prepend=2\n"
        f"3 withdraw us-los {V4}\n"
    )
    assert main(lab + ["scenario", "run", str(script)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == f"t=1 announce us-los {V4} prepend=0 -> ok"
    assert lines[1].startswith(f"  routes: {V4}=")
    assert f"t=3 withdraw us-los {V4} -> ok" in lines

    script.write_text(f"1 announce xx-yyy {V4}\n")
    assert main(lab + ["scenario", "run", str(script)]) == 1


def test_measure_and_report(lab, tmp_path, capsys):
    """Draw a hit list, measure it and report on the replies."""
    hitlist = tmp_path / "hitlist.csv"
    replies = tmp_path / "replies.csv"
    command = ["measure", "hitlist", "--size", "200", "--output"]
    assert main(lab + command + [str(hitlist)]) == 0

    run = [
        "measure",
        "run",
        "--hitlist",
        str(hitlist),
        "--pingers",
        "nl-ens,us-los",
        "--all-sites",
        "--output",
        str(replies),
    ]
    assert main(lab + run) == 0
    records = read_replies_csv(replies.read_text())
    assert len(records) == 200
    first = replies.read_text()

    assert main(lab + ["--workers", "3"] + run) == 0
    assert replies.read_text() == first

    capsys.readouterr()
    assert main(lab + ["report", "catchment", str(replies)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# sites| replies -  percentual\n\n")

    assert main(lab + ["report", "ttl", "--format", "csv", str(replies)]) == 0
    assert capsys.readouterr().out.startswith("ttl,count\n")

    command = ["report", "rtt", "--group-by", "country", str(replies)]
    assert main(lab + command) == 0
    assert capsys.readouterr().out.startswith("# group | count")

    command = ["report", "load", "--hitlist", str(hitlist), str(replies)]
    assert main(lab + command) == 0
    assert "# unmapped /24 networks: 0" in capsys.readouterr().out


def test_measure_without_announcement(lab, tmp_path):
    """Measuring an empty stored state is a domain error."""
    hitlist = tmp_path / "hitlist.csv"
    command = ["measure", "hitlist", "--size", "5", "--output", str(hitlist)]
    assert main(lab + command) == 0
    command = ["measure", "run", "--hitlist", str(hitlist), "--pingers"]
    command.append("nl-ens")
    assert main(lab + command) == 1


def test_bad_replies(tmp_path, capsys):
    """A replies file with the wrong header exits with 1."""
    replies = tmp_path / "replies.csv"
    replies.write_text("site,ttl\n")
    assert main(["report", "catchment", str(replies)]) == 1
    assert main(["report", "catchment", str(tmp_path / "missing.csv")]) == 1


def test_poison_list(lab, capsys):
    """Poisoned ASes must be numbers."""
    command = ["ctl", "-4", "-A", "-t", "br-poa", "-r", V4]
    assert main(lab + command + ["--poison", "abc"]) == 2
    assert "AS numbers" in capsys.readouterr().err

    assert main(lab + command + ["--poison", "3356, 174"]) == 0
    assert "poison=174,3356" in capsys.readouterr().out


def test_invalid_plan(lab, tmp_path, capsys):
    """A plan refused by its model exits with 1."""
    hitlist = tmp_path / "hitlist.csv"
    command = ["measure", "hitlist", "--size", "5", "--output", str(hitlist)]
    assert main(lab + command) == 0
    assert main(lab + ["ctl", "-4", "-A", "-t", "br-poa", "-r", V4]) == 0
    capsys.readouterr()

    run = ["measure", "run", "--hitlist", str(hitlist), "--pingers", "nl-ens"]
    assert main(lab + run + ["--prefix", "145.100.118.1/23"]) == 1
    assert main(lab + run + ["--rate", "0"]) == 1
    assert "rate_pps" in capsys.readouterr().err
    assert main(lab + run + ["--rate", "0", "--all-sites"]) == 1
