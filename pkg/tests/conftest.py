import pytest

from fplab.arith import build_tables


@pytest.fixture(scope="session")
def tables_small():
    return build_tables(10**4)


@pytest.fixture(scope="session")
def tables_big():
    return build_tables(10**6)
