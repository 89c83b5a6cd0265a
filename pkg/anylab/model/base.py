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

"""Base Model for all anylab domain types.

Every domain type (AS nodes, links, announcements, RIB entries, reply
records...) inherits from the `Model` class defined here.  Models are
described using simple type annotations and inherit from Pydantic
`BaseModel`, so they share the features of models defined in Pydantic:

```python
from anylab.model import Model

class Link(Model):

    '''A link between two ASes.'''

    from_asn: int
    to_asn: int
    latency_ms: float = 10.0
```

Unlike plain Pydantic models, anylab models are frozen: once built,
a topology or a RIB can be shared by any number of readers without
locking.  To "modify" a model, build a new one with `copy(update=...)`.
Collections held by models should be tuples or frozensets, so that
frozen models stay hashable.  Unknown fields are rejected, so a typo in
a keyword argument fails loudly instead of being silently ignored.

"""

from pydantic import BaseModel, Field, PrivateAttr  # noqa: F401

from anylab.model.decorators import LazyPropertyDescriptor


class Model(BaseModel):

    """Abstract class for all models."""

    _lazy_cache: dict = PrivateAttr(default_factory=dict)

    class Config:
        extra = "forbid"
        frozen = True
        keep_untouched = (LazyPropertyDescriptor,)
        copy_on_model_validation = "none"
        arbitrary_types_allowed = True

    def copy(self, **kwargs):
        """Copy the model, never sharing cached derived data."""
        duplicate = super().copy(**kwargs)
        object.__setattr__(duplicate, "_lazy_cache", {})
        return duplicate

    def __eq__(self, other):
        # `BaseModel.__eq__` goes through `dict()`, which cannot rebuild
        # frozensets of nested models.
        if not isinstance(other, BaseModel):
            return NotImplemented
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self), tuple(self.__dict__.values())))
