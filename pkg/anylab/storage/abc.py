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

"""Where the control state lives between two `anylab ctl` runs."""

from abc import ABCMeta, abstractmethod
from typing import List, Tuple

from anylab.routing.announcement import Announcement

LogRow = Tuple[int, str, str]


class AbstractStorageEngine(metaclass=ABCMeta):

    """Abstract storage engine.

    The storage engine keeps the controller's state between two
    invocations: the active announcements and the command log.  The
    controller writes through to it on every change, so that the
    stored state always matches the state in memory.  The
    implementation of such a storage engine depends on the storage
    system being used.

    """

    @abstractmethod
    def init(self):
        """Open the storage.

        Engines are built empty and opened here, with whatever options
        they need (a file, an in-memory flag...).

        """

    @abstractmethod
    def close(self):
        """Release the storage, keeping what it holds."""

    @abstractmethod
    def destroy(self):
        """Close the storage and delete what it holds."""

    @abstractmethod
    def load_announcements(self) -> List[Announcement]:
        """Return every stored announcement, by site then prefix."""

    @abstractmethod
    def save_announcement(self, announcement: Announcement):
        """Store an announcement.

        An announcement already stored for the same site and prefix
        is replaced.

        Args:
            announcement (Announcement): the announcement to store.

        """

    @abstractmethod
    def delete_announcement(self, site_id: str, prefix: str) -> bool:
        """Delete the announcement of a site for a prefix.

        Args:
            site_id (str): the site identifier.
            prefix (str): the normalized prefix.

        Returns:
            deleted (bool): whether an announcement was deleted.

        """

    @abstractmethod
    def load_log(self) -> List[LogRow]:
        """Return the command log as (time, command, outcome) rows."""

    @abstractmethod
    def append_log(self, time: int, command: str, outcome: str):
        """Append a row to the command log."""

    @abstractmethod
    def clear(self):
        """Forget every announcement and the whole command log."""
