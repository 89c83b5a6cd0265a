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

"""Exceptions raised by anylab.

Every domain failure is a `ValueError` subclass, so callers that only
care about "bad input" can keep catching `ValueError`.  The command-line
interface maps `AnylabError` to exit code 1.

"""

from typing import Any, List, Sequence


class AnylabError(ValueError):

    """Base class for all domain errors."""


class TopologyParseError(AnylabError):

    """A topology document could not be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class TopologyValidationError(AnylabError):

    """A topology violates one or more invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid topology: " + "; ".join(self.violations))


class UnknownSiteError(AnylabError):

    """The named anycast site does not exist."""

    def __init__(self, site_id: str):
        self.site_id = site_id
        super().__init__(f"unknown site: {site_id!r}")


class CapabilityError(AnylabError):

    """A site was asked for a policy its upstream does not support."""

    def __init__(self, policy: str, site_id: str):
        self.policy = policy
        self.site_id = site_id
        super().__init__(
            f"policy {policy} is not supported at site {site_id}"
        )


class PrefixError(AnylabError):

    """A prefix is malformed or outside the declared anycast space."""


class NoRouteError(AnylabError):

    """An AS holds no route toward a prefix."""

    def __init__(self, asn: int, prefix: str):
        self.asn = asn
        self.prefix = prefix
        super().__init__(f"AS{asn} has no route to {prefix}")


class OscillationError(AnylabError):

    """Route propagation did not reach a fixpoint."""

    def __init__(self, prefix: str, rounds: int):
        self.prefix = prefix
        self.rounds = rounds
        super().__init__(
            f"propagation of {prefix} did not converge "
            f"after {rounds} rounds"
        )


class ScenarioError(AnylabError):

    """A scenario command failed.

    Attributes:
        index (int): 1-based position of the failing command.
        snapshots (list): the snapshots recorded before the failure.
        state: the control state as it was when the command failed.

    """

    def __init__(
        self,
        index: int,
        message: str,
        snapshots: List[Any] = None,
        state: Any = None,
    ):
        self.index = index
        self.snapshots = list(snapshots or [])
        self.state = state
        super().__init__(f"command {index}: {message}")


class EmptyCatchmentError(AnylabError):

    """No site announces the measured prefix."""

    def __init__(self, prefix: str):
        self.prefix = prefix
        super().__init__(f"no site announces {prefix}")


class HitListError(AnylabError):

    """A hit-list row is malformed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"hit list line {line}: {message}")


class SchemaError(AnylabError):

    """A CSV header does not match the expected schema."""

    def __init__(self, column: str, message: str):
        self.column = column
        super().__init__(message)
