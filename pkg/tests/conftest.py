import pytest

from qhilb.gw_engine import Engine


@pytest.fixture(scope="session")
def engine():
    """Shared default-config engine; memoization amortizes across tests."""
    return Engine(c_max=4)


@pytest.fixture(scope="session")
def engine_bidegree():
    return Engine(c_max=4, enable_bidegree_vanishing=True)
