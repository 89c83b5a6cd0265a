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

"""The `anylab` command.

```
anylab topo fixture > tangled.topo
anylab --topology tangled.topo topo validate
anylab ctl -4 -A -t br-poa -r 145.100.118.0/23 -P 20
anylab ctl -6 -A -t fr-par -r 2001:610:9000::/40
anylab ctl -S
anylab scenario run experiment.txt
anylab measure hitlist --size 100000 > hitlist.csv
anylab measure run --hitlist hitlist.csv --pingers nl-ens > replies.csv
anylab report catchment replies.csv
```

Exit codes: 0 on success, 1 on a domain error (unknown site,
unsupported policy, parse failure...), 2 on a usage error.

"""

import argparse
import logging
from pathlib import Path
import sys
from typing import List, Optional

from anylab.analysis import reports
from anylab.cli.csvio import read_replies_csv, write_replies_csv
from anylab.config import Settings, get_settings
from anylab.controller import ControlState, run_scenario
from anylab.probe import (
    HitListEntry,
    MeasurementPlan,
    estimate_duration,
    load_hitlist,
    pace_check,
    run_measurement,
    synthetic_hitlist,
    write_hitlist,
)
from anylab.routing import catchment
from anylab.storage import SQLStorageEngine
from anylab.topology import (
    SITES,
    load_topology,
    notices,
    parse_topology,
    serialize,
    tangled_fixture,
    validate,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "anylab %(levelname)s %(name)s - %(message)s"


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser of the `anylab` command."""
    parser = argparse.ArgumentParser(
        prog="anylab",
        description="Desk-scale anycast laboratory.",
    )
    parser.add_argument(
        "--seed", type=int, help="seed of every random draw (default: 1)"
    )
    parser.add_argument(
        "--workers", type=int, help="worker threads (default: 1)"
    )
    parser.add_argument(
        "--stubs", type=int, help="stub ASes of the fixture (default: 200)"
    )
    parser.add_argument(
        "--topology",
        type=Path,
        help="topology file (default: the built-in fixture)",
    )
    parser.add_argument(
        "--state",
        type=Path,
        help="control state database (default: anylab.sqlite)",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="log more (-v for info, -vv for debug)",
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    _add_topo(commands)
    _add_ctl(commands)
    _add_scenario(commands)
    _add_measure(commands)
    _add_report(commands)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command, returning its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 0

    _configure_logging(args.verbose)
    try:
        settings = get_settings(
            seed=args.seed,
            workers=args.workers,
            stubs=args.stubs,
            state_file=args.state,
        )
        if args.command == "ctl":
            _check_ctl(parser, args)
        return args.handler(args, settings)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 0
    except (ValueError, OSError) as err:
        logger.error("%s", err)
        return 1


def run():
    """Entry point of the console script."""
    sys.exit(main())


def _configure_logging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG

    logging.basicConfig(
        stream=sys.stderr, format=LOG_FORMAT, level=level, force=True
    )


def _topology(args, settings: Settings):
    if args.topology is not None:
        return load_topology(args.topology.read_text())

    return tangled_fixture(
        seed=settings.seed,
        stubs=settings.stubs,
        ixp_fanout=settings.ixp_fanout,
    )


def _output(path: Optional[Path]):
    if path is None:
        return sys.stdout
    return path.open("w", encoding="utf-8", newline="")


# topo
def _add_topo(commands):
    topo = commands.add_parser("topo", help="topology files")
    actions = topo.add_subparsers(dest="action", metavar="ACTION")
    actions.required = True

    fixture = actions.add_parser("fixture", help="print the fixture")
    fixture.set_defaults(handler=_topo_fixture)

    check = actions.add_parser("validate", help="check a topology file")
    check.add_argument("file", type=Path, nargs="?")
    check.set_defaults(handler=_topo_validate)

    show = actions.add_parser("show", help="describe sites and ASes")
    show.set_defaults(handler=_topo_show)


def _topo_fixture(args, settings):
    topology = tangled_fixture(
        seed=settings.seed,
        stubs=settings.stubs,
        ixp_fanout=settings.ixp_fanout,
    )
    sys.stdout.write(serialize(topology))
    return 0


def _topo_validate(args, settings):
    path = args.file or args.topology
    if path is None:
        topology = _topology(args, settings)
    else:
        topology = parse_topology(path.read_text())

    violations = validate(topology)
    for notice in notices(topology):
        print(f"notice: {notice}")
    for violation in violations:
        print(f"violation: {violation}")
    if violations:
        return 1

    print(
        f"ok: {len(topology.nodes)} ASes, {len(topology.links)} links, "
        f"{len(topology.sites)} sites"
    )
    return 0


def _topo_show(args, settings):
    topology = _topology(args, settings)
    rows = {row.site_id: row for row in SITES}
    print(
        f"{len(topology.nodes)} ASes, {len(topology.links)} links, "
        f"{len(topology.sites)} sites"
    )
    for site in topology.sites:
        row = rows.get(site.site_id)
        providers = [
            f"AS{nbr.asn}"
            for nbr in topology.neighbors(site.host_asn)
            if nbr.role.value == "provider"
        ]
        policies = ",".join(
            sorted(policy.value for policy in site.te_capabilities)
        )
        location = row.location if row else "-"
        print(
            f"{site.site_id} AS{site.host_asn} {location} | "
            f"providers={','.join(providers) or '-'} | {policies}"
        )
    for prefix in topology.anycast_prefixes:
        print(f"prefix {prefix.cidr} (IPv{prefix.family})")
    return 0


# ctl
def _add_ctl(commands):
    ctl = commands.add_parser(
        "ctl", help="announce and withdraw prefixes at sites"
    )
    family = ctl.add_mutually_exclusive_group()
    family.add_argument(
        "-4", dest="family", action="store_const", const=4, help="IPv4"
    )
    family.add_argument(
        "-6", dest="family", action="store_const", const=6, help="IPv6"
    )
    action = ctl.add_mutually_exclusive_group()
    action.add_argument(
        "-A", "--announce", action="store_true", help="announce a prefix"
    )
    action.add_argument(
        "-W", "--withdraw", action="store_true", help="withdraw a prefix"
    )
    action.add_argument(
        "-S", "--status", action="store_true", help="print the status"
    )
    action.add_argument(
        "--reverse-prepend",
        metavar="KEEP",
        help="prepend -P times at every site but KEEP",
    )
    ctl.add_argument("-t", "--site", help="site identifier, like br-poa")
    ctl.add_argument("-r", "--prefix", help="prefix, like 145.100.118.0/23")
    ctl.add_argument("-P", "--prepend", type=int, help="prepend count")
    ctl.add_argument(
        "-C",
        "--community",
        action="append",
        default=[],
        help="community, like noPeer or advertiseOnly:1251 (repeatable)",
    )
    ctl.add_argument(
        "--poison",
        type=_asn_list,
        default=[],
        help="comma-separated AS numbers to poison",
    )
    ctl.set_defaults(handler=_ctl)


def _asn_list(value: str) -> List[int]:
    try:
        return [int(asn) for asn in value.split(",") if asn.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated AS numbers, got {value!r}"
        ) from None


def _check_ctl(parser, args):
    ctl = "anylab ctl"
    if args.prepend is not None and not (
        args.announce or args.reverse_prepend
    ):
        parser.error(f"{ctl}: -P requires -A or --reverse-prepend")
    if args.prefix is not None and args.family is None:
        parser.error(f"{ctl}: -r requires exactly one of -4 or -6")
    if args.announce or args.withdraw:
        if args.site is None or args.prefix is None:
            parser.error(f"{ctl}: -A and -W require -t and -r")
    if args.reverse_prepend and (args.prefix is None or not args.prepend):
        parser.error(f"{ctl}: --reverse-prepend requires -r and -P")
    if not (
        args.announce or args.withdraw or args.status or args.reverse_prepend
    ):
        parser.error(f"{ctl}: one of -A, -W, -S or --reverse-prepend needed")


def _ctl(args, settings):
    topology = _topology(args, settings)
    storage = SQLStorageEngine()
    storage.init(settings.state_file, logging=True)
    try:
        state = ControlState(topology, storage, workers=settings.workers)
        if args.announce:
            communities = [
                name
                for option in args.community
                for name in option.split(",")
                if name
            ]
            state.announce(
                args.site,
                args.prefix,
                family=args.family,
                prepend=args.prepend or 0,
                communities=communities,
                poison=args.poison,
            )
            print(state.log[-1].command)
        elif args.withdraw:
            state.withdraw(args.site, args.prefix)
            print(f"{state.log[-1].command}: {state.log[-1].outcome}")
        elif args.reverse_prepend:
            state.reverse_prepend(
                args.prefix, args.reverse_prepend, args.prepend
            )
            print(state.log[-1].command)
        else:
            sys.stdout.write(state.status())
    finally:
        storage.close()

    return 0


# scenario
def _add_scenario(commands):
    scenario = commands.add_parser("scenario", help="timed command scripts")
    actions = scenario.add_subparsers(dest="action", metavar="ACTION")
    actions.required = True

    runner = actions.add_parser("run", help="run a scenario from scratch")
    runner.add_argument("file", type=Path)
    runner.set_defaults(handler=_scenario_run)


def _scenario_run(args, settings):
    topology = _topology(args, settings)
    state = ControlState(topology, workers=settings.workers)
    result = run_scenario(state, args.file.read_text())
    for entry, rib in zip(result.state.log, result.snapshots):
        mapping = {}
        for prefix in rib.prefixes:
            mapping[prefix] = catchment(rib, prefix)
        sizes = " ".join(
            f"{prefix}={len(found)}" for prefix, found in mapping.items()
        )
        print(f"t={entry.time} {entry.command} -> {entry.outcome}")
        print(f"  routes: {sizes or 'none'}")

    sys.stdout.write(result.state.status())
    return 0


# measure
def _add_measure(commands):
    measure = commands.add_parser("measure", help="catchment measurement")
    actions = measure.add_subparsers(dest="action", metavar="ACTION")
    actions.required = True

    runner = actions.add_parser("run", help="probe a hit list")
    runner.add_argument("--hitlist", type=Path, required=True)
    runner.add_argument(
        "--pingers",
        required=True,
        help="comma-separated pinger sites, like nl-ens,us-los",
    )
    runner.add_argument("--rate", type=int, help="probes per second")
    runner.add_argument(
        "--prefix",
        help="measured anycast prefix (default: the first declared one)",
    )
    runner.add_argument(
        "--all-sites",
        action="store_true",
        help="announce the prefix at every site instead of using the state",
    )
    runner.add_argument("--loss", type=float, help="probe loss probability")
    runner.add_argument("--output", type=Path, help="replies CSV file")
    runner.set_defaults(handler=_measure_run)

    hitlist = actions.add_parser("hitlist", help="draw a synthetic hit list")
    hitlist.add_argument("--size", type=int, required=True)
    hitlist.add_argument("--output", type=Path, help="hit list CSV file")
    hitlist.set_defaults(handler=_measure_hitlist)


def _measure_run(args, settings):
    topology = _topology(args, settings)
    prefix = args.prefix or topology.anycast_prefixes[0].cidr
    if args.all_sites:
        state = ControlState(topology, workers=settings.workers)
        for site in topology.sites:
            state.announce(site.site_id, prefix)
    else:
        storage = SQLStorageEngine()
        storage.init(settings.state_file, logging=True)
        try:
            state = ControlState(topology, storage, workers=settings.workers)
        finally:
            storage.close()

    hitlist = load_hitlist(args.hitlist.read_text(), topology)
    plan = MeasurementPlan(
        hitlist=tuple(hitlist),
        pinger_sites=tuple(args.pingers.split(",")),
        rate_pps=settings.rate_pps if args.rate is None else args.rate,
        anycast_prefix=prefix,
    )
    pace_check(plan, settings.abuse_threshold_pps)
    logger.info("estimated duration: %d s", estimate_duration(plan))

    records = run_measurement(
        topology,
        state.rib(),
        plan,
        loss=settings.loss if args.loss is None else args.loss,
        seed=settings.seed,
        initial_ttl=settings.initial_ttl,
        workers=settings.workers,
    )
    sink = _output(args.output)
    try:
        size = write_replies_csv(records, sink)
    finally:
        if sink is not sys.stdout:
            sink.close()

    if records:
        logger.info(
            "wrote %d bytes, %.1f bytes per reply", size, size / len(records)
        )
    return 0


def _measure_hitlist(args, settings):
    topology = _topology(args, settings)
    entries = synthetic_hitlist(topology, args.size, seed=settings.seed)
    sink = _output(args.output)
    try:
        write_hitlist(entries, sink)
    finally:
        if sink is not sys.stdout:
            sink.close()
    return 0


# report
def _add_report(commands):
    report = commands.add_parser("report", help="reports over replies")
    report.add_argument(
        "kind", choices=("catchment", "ttl", "rtt", "load")
    )
    report.add_argument("replies", type=Path)
    report.add_argument(
        "--format", choices=("text", "csv"), default="text"
    )
    report.add_argument(
        "--group-by",
        choices=[group.value for group in reports.GroupBy],
        default=reports.GroupBy.SITE.value,
        help="RTT grouping",
    )
    report.add_argument(
        "--hitlist",
        type=Path,
        help="hit list, to count unmapped networks in load reports",
    )
    report.set_defaults(handler=_report)


def _report(args, settings):
    records = read_replies_csv(args.replies.read_text())
    as_csv = args.format == "csv"
    if args.kind == "catchment":
        summary = reports.catchment_summary(records)
        output = summary.to_csv() if as_csv else summary.render()
    elif args.kind == "ttl":
        histogram = reports.ttl_distribution(records)
        output = (
            reports.ttl_csv(histogram)
            if as_csv
            else reports.render_ttl(histogram)
        )
    elif args.kind == "rtt":
        rows = reports.rtt_aggregate(records, reports.GroupBy(args.group_by))
        output = reports.rtt_csv(rows) if as_csv else reports.render_rtt(rows)
    else:
        mapping = {record.asn: record.site for record in records}
        if args.hitlist is not None:
            hitlist = load_hitlist(args.hitlist.read_text())
        else:
            hitlist = [
                HitListEntry(
                    address=record.target_ip, cc=record.cc, asn=record.asn
                )
                for record in records
            ]
        estimate = reports.load_estimate(mapping, hitlist)
        output = estimate.to_csv() if as_csv else estimate.render()

    sys.stdout.write(output)
    return 0
