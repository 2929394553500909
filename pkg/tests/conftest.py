import pytest

from afembed.embedding import embed
from afembed.graph import parse_graph

SQUARE_TEXT = """\
# the 4-cycle: u_i -> u_{i+1 mod 4}
vertex u1
vertex u2
vertex u3
vertex u4
edge e1 u1 u2
edge e2 u2 u3
edge e3 u3 u4
edge e4 u4 u1
"""


@pytest.fixture(scope="session")
def square():
    return parse_graph(SQUARE_TEXT)


@pytest.fixture(scope="session")
def square_embedding(square):
    return embed(square)


@pytest.fixture(scope="session")
def self_loop():
    return parse_graph("vertex u\nedge e u u\n")


@pytest.fixture(scope="session")
def two_self_loops():
    return parse_graph("vertex v\nedge a v v\nedge b v v\n")


@pytest.fixture(scope="session")
def square_plus_entrance():
    return parse_graph(SQUARE_TEXT + "vertex w\nedge x w u2\n")
