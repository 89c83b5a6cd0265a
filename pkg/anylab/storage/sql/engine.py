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

"""SQLAlchemy storage engine for anylab."""

import logging
from pathlib import Path
from typing import Any, Callable, List, Optional, Tuple, Union

from sqlalchemy import (
    Column,
    Integer,
    MetaData,
    Table,
    Text,
    create_engine,
    event,
)
from sqlalchemy.sql import select

from anylab.routing.announcement import Announcement
from anylab.routing.community import Community
from anylab.storage.abc import AbstractStorageEngine, LogRow

logger = logging.getLogger(__name__)


class SQLStorageEngine(AbstractStorageEngine):

    """Control state in an SQLite database, through SQLAlchemy Core.

    Announcements are keyed by site and prefix, their communities and
    poisoned ASes stored as comma-separated text.  The command log
    keeps its insertion order.

    """

    def __init__(self):
        self.file_name: Optional[Path] = None
        self.memory = False
        self.logging = False
        self.engine = None
        self.connection = None
        self.metadata = None
        self.tables = {}

    def init(
        self,
        file_name: Union[str, Path, None] = None,
        memory: bool = False,
        logging: Union[bool, Callable[[str, Tuple[Any]], None]] = True,
    ):
        """Open the database, creating the tables if needed.

        Args:
            file_name (str or Path): the SQLite file, created on first
                    use.  Required unless `memory` is set.
            memory (bool): keep the database in memory, for tests; the
                    file name is then ignored.
            logging (bool or callable): if True (the default), log SQL
                    queries at debug level.  A callable receives the
                    statement and its parameters instead.

        """
        self.file_name = None
        self.memory = memory
        self.logging = logging

        if memory:
            sql_file_name = ":memory:"
        else:
            if file_name is None:
                raise ValueError("a file name is needed unless in memory")

            file_name = Path(file_name)
            sql_file_name = str(file_name.resolve())
            self.file_name = file_name
        self.engine = create_engine(f"sqlite:///{sql_file_name}")

        # Statements go through `self.logging`, read on every call.
        @event.listens_for(self.engine, "before_cursor_execute")
        def log_query(conn, cr, statement, parameters, *_):
            log = self.logging
            if not log:
                return

            if callable(log):
                log(statement.strip(), parameters)
            else:
                logger.debug("%s %s", statement.strip(), parameters)

        self.connection = self.engine.connect()
        self.metadata = MetaData()
        self.tables = {
            "announcement": Table(
                "announcement",
                self.metadata,
                Column("site_id", Text, primary_key=True),
                Column("prefix", Text, primary_key=True),
                Column("origin_prepend", Integer, nullable=False),
                Column("poisoned_asns", Text, nullable=False),
                Column("communities", Text, nullable=False),
            ),
            "command_log": Table(
                "command_log",
                self.metadata,
                Column("id", Integer, primary_key=True),
                Column("time", Integer, nullable=False),
                Column("command", Text, nullable=False),
                Column("outcome", Text, nullable=False),
            ),
        }
        self.metadata.create_all(self.engine)

    def close(self):
        """Close the connection, keeping the database file."""
        if self.connection is not None:
            self.connection.close()
            self.connection = None
        if self.engine is not None:
            self.engine.dispose()
            self.engine = None

    def destroy(self):
        """Close, then delete the database file if there is one."""
        self.close()
        if self.file_name and self.file_name.exists():
            self.file_name.unlink()

    def load_announcements(self) -> List[Announcement]:
        """Return every stored announcement, by site then prefix."""
        table = self.tables["announcement"]
        query = select(table).order_by(table.c.site_id, table.c.prefix)
        rows = self.connection.execute(query).fetchall()
        return [self._announcement_from_row(row) for row in rows]

    def save_announcement(self, announcement: Announcement):
        """Store an announcement, replacing the one of the same pair."""
        self.delete_announcement(announcement.site_id, announcement.prefix)
        table = self.tables["announcement"]
        insert = table.insert().values(
            site_id=announcement.site_id,
            prefix=announcement.prefix,
            origin_prepend=announcement.origin_prepend,
            poisoned_asns=",".join(
                str(asn) for asn in sorted(announcement.poisoned_asns)
            ),
            communities=",".join(
                sorted(str(item) for item in announcement.communities)
            ),
        )
        self.connection.execute(insert)

    def delete_announcement(self, site_id: str, prefix: str) -> bool:
        """Delete an announcement, returning whether it existed."""
        table = self.tables["announcement"]
        delete = table.delete().where(
            table.c.site_id == site_id, table.c.prefix == prefix
        )
        result = self.connection.execute(delete)
        return result.rowcount > 0

    def load_log(self) -> List[LogRow]:
        """Return the command log in insertion order."""
        table = self.tables["command_log"]
        query = select(
            table.c.time, table.c.command, table.c.outcome
        ).order_by(table.c.id)
        rows = self.connection.execute(query).fetchall()
        return [(row.time, row.command, row.outcome) for row in rows]

    def append_log(self, time: int, command: str, outcome: str):
        """Append a row to the command log."""
        table = self.tables["command_log"]
        insert = table.insert().values(
            time=time, command=command, outcome=outcome
        )
        self.connection.execute(insert)

    def clear(self):
        """Forget every announcement and the whole command log."""
        for table in self.tables.values():
            self.connection.execute(table.delete())

    @staticmethod
    def _announcement_from_row(row) -> Announcement:
        poisoned = frozenset(
            int(asn) for asn in row.poisoned_asns.split(",") if asn
        )
        communities = frozenset(
            Community.parse(text)
            for text in row.communities.split(",")
            if text
        )
        return Announcement(
            site_id=row.site_id,
            prefix=row.prefix,
            origin_prepend=row.origin_prepend,
            poisoned_asns=poisoned,
            communities=communities,
        )
