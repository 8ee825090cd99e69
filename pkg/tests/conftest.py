import pytest

from twoway_qkd import load_preset


@pytest.fixture(scope="session")
def gys():
    return load_preset("gys")


@pytest.fixture(scope="session")
def kth():
    return load_preset("kth")
