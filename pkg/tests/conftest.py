import pytest

from colordec.layout import build_layout
from colordec.records import Extractor
from colordec.sim import Runner


@pytest.fixture(scope="session")
def layout3():
    return build_layout(3)


@pytest.fixture(scope="session")
def layout5():
    return build_layout(5)


@pytest.fixture(scope="session")
def runner3(layout3):
    return Runner(layout3, "RESET")


@pytest.fixture(scope="session")
def extractor3(layout3):
    return Extractor(layout3, "RESET")
