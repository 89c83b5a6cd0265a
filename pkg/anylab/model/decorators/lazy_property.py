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

"""Lazy property, to cache data derived from immutable models.

The lazy property descriptor is used similarly to a property,
but it caches the data it computes the first time it's called
and then will only return this cached data.  Models in anylab are
frozen, so derived indexes (adjacency lists, lookup tables, graph
views) never go stale.

"""

_MISSING = object()


class LazyPropertyDescriptor:

    """
    Delays computing a property until first access.

    The cache lives on the instance itself (in a `_lazy_cache` private
    attribute for models, or in `__dict__` otherwise), so that two equal
    but distinct topologies never share cached data:

        ```python
        class AsTopology(Model):
            @lazy_property
            def graph(self):
                return build_graph(self)
        ```

    """

    def __init__(self, fget):
        self.fget = fget
        self.name = fget.__name__
        self.__doc__ = fget.__doc__

    def __set_name__(self, owner, name):
        self.name = name

    def __get__(self, instance, owner=None):
        if instance is None:
            return self

        cache = _get_cache(instance)
        value = cache.get(self.name, _MISSING)
        if value is _MISSING:
            value = self.fget(instance)
            cache[self.name] = value

        return value

    def __set__(self, instance, value):
        raise AttributeError(f"can't set attribute {self.name!r}")


def _get_cache(instance) -> dict:
    """Return the per-instance cache, creating it if needed."""
    cache = getattr(instance, "_lazy_cache", None)
    if cache is None:
        cache = {}
        try:
            object.__setattr__(instance, "_lazy_cache", cache)
        except AttributeError:
            instance.__dict__["_lazy_cache"] = cache

    return cache


def lazy_property(func):
    return LazyPropertyDescriptor(func)
