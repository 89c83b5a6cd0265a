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

"""Runtime settings.

Settings are read from the environment (prefix `ANYLAB_`), so
`ANYLAB_SEED=7 anylab topo fixture` behaves like `anylab --seed 7 topo
fixture`.  Command-line flags always win over the environment.

"""

from pathlib import Path

from pydantic import BaseSettings, Field


class Settings(BaseSettings):

    """Lab-wide defaults."""

    seed: int = 1
    stubs: int = Field(200, ge=0)
    ixp_fanout: int = Field(10, ge=0)
    state_file: Path = Path("anylab.sqlite")
    workers: int = Field(1, ge=1)
    rate_pps: int = Field(3612, gt=0)
    abuse_threshold_pps: int = Field(10_000, ge=0)
    loss: float = Field(0.0, ge=0.0, le=1.0)
    initial_ttl: int = Field(64, ge=1, le=255)

    class Config:
        env_prefix = "ANYLAB_"


def get_settings(**overrides) -> Settings:
    """Return the settings, applying non-None overrides.

    Args:
        overrides: values coming from command-line flags; `None` means
                "not given" and keeps the environment value.

    """
    given = {
        key: value for key, value in overrides.items() if value is not None
    }
    return Settings(**given)
