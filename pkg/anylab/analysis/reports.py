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

"""Reports over measurement records.

Every report has a model, a text rendering and a CSV rendering.  The
catchment summary uses truncated integer percents, laid out as:

```
# sites| replies -  percentual

us-los | 1342542 -  37
jp-hnd |     321 -   0
```

"""

from collections import Counter
import csv
from enum import Enum
import io
from typing import Dict, Iterable, List, Mapping, Tuple

import numpy as np

from anylab.model import Model, lazy_property
from anylab.probe.hitlist import HitListEntry
from anylab.probe.measurement import ReplyRecord

CATCHMENT_HEADER = "# sites| replies -  percentual"


class GroupBy(str, Enum):

    """How RTT aggregates group records."""

    SITE = "site"
    COUNTRY = "country"
    SITE_COUNTRY = "site-country"

    def key(self, record: ReplyRecord) -> str:
        if self is GroupBy.SITE:
            return record.site
        if self is GroupBy.COUNTRY:
            return record.cc
        return f"{record.site}/{record.cc}"


class CatchmentRow(Model):

    site_id: str
    reply_count: int
    percent: int


class CatchmentReport(Model):

    """Replies received per site."""

    rows: Tuple[CatchmentRow, ...] = ()
    total: int = 0

    def render(self) -> str:
        """Render the report as text."""
        lines = [CATCHMENT_HEADER, ""]
        width = max(
            (len(str(row.reply_count)) for row in self.rows), default=1
        )
        for row in self.rows:
            lines.append(
                f"{row.site_id} | {row.reply_count:>{width}} - "
                f"{row.percent:>3}"
            )
        if self.rows:
            lines.append("")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        return _csv(
            ("site", "count", "percent"),
            (
                (row.site_id, row.reply_count, row.percent)
                for row in self.rows
            ),
        )


class RttRow(Model):

    """RTT statistics of one group, in milliseconds."""

    group: str
    count: int
    min: float
    median: float
    mean: float
    p95: float
    max: float


class LoadEstimate(Model):

    """Vantage /24 networks caught by each site.

    Traffic is assumed to be uniform across /24 networks, so the
    share of networks is the share of load.

    """

    networks: Dict[str, int] = {}
    unmapped: int = 0
    uniform_traffic: bool = True

    @lazy_property
    def total(self) -> int:
        return sum(self.networks.values())

    def share(self, site_id: str) -> float:
        """Return the fraction of mapped networks a site catches."""
        if not self.total:
            return 0.0
        return self.networks.get(site_id, 0) / self.total

    def render(self) -> str:
        lines = ["# site | /24 networks - share (uniform traffic assumed)"]
        for site_id, count in self.networks.items():
            lines.append(
                f"{site_id} | {count} - {self.share(site_id) * 100:.2f}%"
            )
        lines.append(f"# unmapped /24 networks: {self.unmapped}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        return _csv(
            ("site", "networks", "share"),
            (
                (site_id, count, f"{self.share(site_id):.6f}")
                for site_id, count in self.networks.items()
            ),
        )


def catchment_summary(records: Iterable[ReplyRecord]) -> CatchmentReport:
    """Count replies per site.

    Rows are sorted by decreasing count, then by site.  Percents are
    truncated, so they may add up to less than 100.

    """
    return catchment_from_counts(Counter(record.site for record in records))


def catchment_from_counts(counts: Mapping[str, int]) -> CatchmentReport:
    """Build a catchment report from known per-site counts."""
    rows = []
    total = sum(counts.values())
    for site, count in sorted(
        counts.items(), key=lambda item: (-item[1], item[0])
    ):
        rows.append(
            CatchmentRow(
                site_id=site, reply_count=count, percent=100 * count // total
            )
        )
    return CatchmentReport(rows=tuple(rows), total=total)


def ttl_distribution(records: Iterable[ReplyRecord]) -> Dict[int, int]:
    """Return the exact TTL histogram, by increasing TTL."""
    counts = Counter(record.ttl for record in records)
    return dict(sorted(counts.items()))


def render_ttl(histogram: Mapping[int, int]) -> str:
    lines = ["# ttl | replies"]
    lines.extend(f"{ttl} | {count}" for ttl, count in histogram.items())
    return "\n".join(lines) + "\n"


def ttl_csv(histogram: Mapping[int, int]) -> str:
    return _csv(("ttl", "count"), histogram.items())


def rtt_aggregate(
    records: Iterable[ReplyRecord], group_by: GroupBy = GroupBy.SITE
) -> List[RttRow]:
    """Aggregate RTTs per group.

    The median and 95th percentile use the nearest-rank method on the
    sorted values, so they are always observed values.

    Args:
        records (iterable of ReplyRecord): the records.
        group_by (GroupBy): site, country or both (`au-syd/AU`).

    Returns:
        rows (list of RttRow): one per non-empty group, by group.

    """
    group_by = GroupBy(group_by)
    groups = {}
    for record in records:
        groups.setdefault(group_by.key(record), []).append(
            record.time_diff_ms
        )

    rows = []
    for group in sorted(groups):
        values = np.sort(np.asarray(groups[group], dtype=float))
        rows.append(
            RttRow(
                group=group,
                count=len(values),
                min=float(values[0]),
                median=_nearest_rank(values, 50),
                mean=float(np.mean(values)),
                p95=_nearest_rank(values, 95),
                max=float(values[-1]),
            )
        )

    return rows


def render_rtt(rows: Iterable[RttRow]) -> str:
    lines = ["# group | count - min / median / mean / p95 / max (ms)"]
    for row in rows:
        lines.append(
            f"{row.group} | {row.count} - {row.min:.3f} / {row.median:.3f}"
            f" / {row.mean:.3f} / {row.p95:.3f} / {row.max:.3f}"
        )
    return "\n".join(lines) + "\n"


def rtt_csv(rows: Iterable[RttRow]) -> str:
    return _csv(
        ("group", "count", "min", "median", "mean", "p95", "max"),
        (
            (
                row.group,
                row.count,
                *(
                    f"{value:.6f}"
                    for value in (
                        row.min,
                        row.median,
                        row.mean,
                        row.p95,
                        row.max,
                    )
                ),
            )
            for row in rows
        ),
    )


def load_estimate(
    mapping: Mapping[int, str], hitlist: Iterable[HitListEntry]
) -> LoadEstimate:
    """Count the vantage networks each site catches.

    Args:
        mapping (dict): AS number to catchment site.
        hitlist (iterable of HitListEntry): the vantage points, one
                per network.

    Returns:
        estimate (LoadEstimate): every site of the mapping, with 0 if
                it catches no listed network.

    """
    counts = Counter({site: 0 for site in mapping.values()})
    unmapped = 0
    seen = set()
    for entry in hitlist:
        if entry.network in seen:
            continue
        seen.add(entry.network)

        site = mapping.get(entry.asn) if entry.routable else None
        if site is None:
            unmapped += 1
        else:
            counts[site] += 1

    networks = dict(
        sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    )
    return LoadEstimate(networks=networks, unmapped=unmapped)


def _nearest_rank(values, percent: int) -> float:
    rank = max(1, -(-percent * len(values) // 100))
    return float(values[rank - 1])


def _csv(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()
