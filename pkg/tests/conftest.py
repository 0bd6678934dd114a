import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphprod import CyclicGroup, GraphProduct, IntegerGroup, SimplicialGraph  # noqa: E402


def p3():
    return GraphProduct.raag(SimplicialGraph.path(3))


def p4():
    return GraphProduct.raag(SimplicialGraph.path(4))


def z2():
    return GraphProduct.raag(SimplicialGraph.path(2))


def f2():
    return GraphProduct.raag(SimplicialGraph.discrete(2))


def k3_mixed():
    g = SimplicialGraph.complete(3)
    return GraphProduct(g, {"a": IntegerGroup(), "b": CyclicGroup(3), "c": IntegerGroup()})


@pytest.fixture
def P3():
    return p3()


@pytest.fixture
def P4():
    return p4()


@pytest.fixture
def Z2():
    return z2()


@pytest.fixture
def F2():
    return f2()


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
