import pytest

from anylab.storage import SQLStorageEngine
from anylab.topology import load_topology, tangled_fixture

ALL_CAPS = (
    "Prepend,noPeer,noExport,noClient,SelectivePrepend,SelectiveAdvertise"
)

CHAIN = f"""
# 1 is a customer of 2, which is a customer of 3.
as 1 origin site=aa-aaa vps=1 access=1.5
as 2 middle vps=1
as 3 top vps=1
link 1 2 c2p lat=5
link 2 3 c2p lat=7
prefix 10.0.0.0/16
cap aa-aaa {ALL_CAPS}
"""

DIAMOND = f"""
# 2 and 3 are both providers of 1 and customers of 4.
as 1 origin site=aa-aaa
as 2 left
as 3 right
as 4 top
link 1 2 c2p lat=1
link 1 3 c2p lat=1
link 2 4 c2p lat=1
link 3 4 c2p lat=1
prefix 10.0.0.0/16
cap aa-aaa {ALL_CAPS}
"""


@pytest.fixture(scope="function")
def db():
    engine = SQLStorageEngine()
    engine.init(memory=True, logging=False)
    yield engine
    engine.destroy()


@pytest.fixture(scope="session")
def fixture_topology():
    return tangled_fixture()


@pytest.fixture(scope="function")
def chain():
    return load_topology(CHAIN)


@pytest.fixture(scope="function")
def diamond():
    return load_topology(DIAMOND)
