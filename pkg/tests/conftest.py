import pytest

from ustlab.graph import WeightedGraph


@pytest.fixture
def k3():
    return WeightedGraph([0, 1, 2], [(0, 1, 1, "a"), (1, 2, 1, "b"), (0, 2, 1, "c")])


@pytest.fixture
def k3_weighted():
    return WeightedGraph([0, 1, 2], [(0, 1, 2, "a"), (1, 2, 1, "b"), (0, 2, 1, "c")])


@pytest.fixture
def c4():
    return WeightedGraph(
        [0, 1, 2, 3],
        [(0, 1, 1, "a"), (1, 2, 1, "b"), (2, 3, 1, "c"), (3, 0, 1, "d")],
    )
