import pathlib

import pytest

from namcount import Graph, erdos_renyi

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n)
                                for j in range(i + 1, n)])


@pytest.fixture(scope="session")
def k3():
    return complete_graph(3)


@pytest.fixture(scope="session")
def k4():
    return complete_graph(4)


@pytest.fixture(scope="session")
def k5():
    return complete_graph(5)


@pytest.fixture(scope="session")
def c4():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


@pytest.fixture(scope="session")
def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture(scope="session")
def star5():
    """Hub with five leaves; triangle- and quadrangle-free."""
    return Graph.from_edges(6, [(0, i) for i in range(1, 6)])


@pytest.fixture(scope="session")
def irr5():
    """Irregular 5-node graph: two triangles sharing an edge plus a pendant."""
    return Graph.from_edges(5, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4)])


@pytest.fixture(scope="session")
def er20():
    return erdos_renyi(20, 0.35, seed=7)


@pytest.fixture(scope="session")
def toy_path():
    return FIXTURES / "toy.txt"


@pytest.fixture(scope="session")
def k4_path():
    return FIXTURES / "k4.txt"
