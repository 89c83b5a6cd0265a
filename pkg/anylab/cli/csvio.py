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

"""Reply CSV reading and writing.

The reply CSV has the header `site,time_diff,target_ip,anycast_ip,ttl,
cc,asn`, one row per reply, time differences with six decimals, rows
sorted by site then target address and line-feed line endings:

```
site,time_diff,target_ip,anycast_ip,ttl,cc,asn
au-syd,97.191805,1.1.1.2,145.100.118.1,52,AU,13335
```

"""

import csv
import io
from typing import Iterable, List, TextIO

from anylab.errors import SchemaError
from anylab.probe.measurement import ReplyRecord

REPLY_COLUMNS = (
    "site",
    "time_diff",
    "target_ip",
    "anycast_ip",
    "ttl",
    "cc",
    "asn",
)


def format_reply(record: ReplyRecord) -> List[str]:
    return [
        record.site,
        f"{record.time_diff_ms:.6f}",
        record.target_ip,
        record.anycast_ip,
        str(record.ttl),
        record.cc,
        str(record.asn),
    ]


def write_replies_csv(records: Iterable[ReplyRecord], sink: TextIO) -> int:
    """Write replies as CSV, in canonical order.

    Args:
        records (iterable of ReplyRecord): the replies.
        sink (file-like): where to write.

    Returns:
        size (int): the number of bytes written, header included.

    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPLY_COLUMNS)
    for record in sorted(records, key=lambda record: record.sort_key):
        writer.writerow(format_reply(record))

    text = buffer.getvalue()
    sink.write(text)
    return len(text.encode("utf-8"))


def read_replies_csv(source: str) -> List[ReplyRecord]:
    """Read replies written by `write_replies_csv`.

    Raises:
        SchemaError: the header does not match, or a value is not
                valid for its column.

    """
    reader = csv.reader(io.StringIO(source))
    header = next(reader, None)
    if header is None:
        raise SchemaError(REPLY_COLUMNS[0], "missing header")

    header = [column.strip() for column in header]
    for position, expected in enumerate(REPLY_COLUMNS):
        if position >= len(header):
            raise SchemaError(expected, f"missing column {expected!r}")
        if header[position] != expected:
            raise SchemaError(
                header[position],
                f"column {position + 1} is {header[position]!r}, "
                f"expected {expected!r}",
            )
    if len(header) > len(REPLY_COLUMNS):
        extra = header[len(REPLY_COLUMNS)]
        raise SchemaError(extra, f"unexpected column {extra!r}")

    records = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(REPLY_COLUMNS):
            raise SchemaError(
                REPLY_COLUMNS[min(len(row), len(REPLY_COLUMNS) - 1)],
                f"line {reader.line_num}: expected {len(REPLY_COLUMNS)} "
                f"values, got {len(row)}",
            )

        values = dict(zip(REPLY_COLUMNS, row))
        try:
            record = ReplyRecord(
                site=values["site"],
                time_diff_ms=values["time_diff"],
                target_ip=values["target_ip"],
                anycast_ip=values["anycast_ip"],
                ttl=values["ttl"],
                cc=values["cc"],
                asn=values["asn"],
            )
        except ValueError as err:
            column = _column_of(err)
            raise SchemaError(
                column, f"line {reader.line_num}: invalid {column!r} value"
            )
        records.append(record)

    return records


def _column_of(error) -> str:
    fields = {
        "time_diff_ms": "time_diff",
    }
    try:
        name = error.errors()[0]["loc"][0]
    except (AttributeError, IndexError, KeyError):
        return REPLY_COLUMNS[0]
    return fields.get(name, name)
