import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hiercent import datasets  # noqa: E402
from hiercent.graph import Graph  # noqa: E402


@pytest.fixture(scope="session")
def karate():
    return datasets.karate()


@pytest.fixture(scope="session")
def lesmis():
    return datasets.les_miserables()


def complete(n):
    return Graph.from_edges([(u, v) for u in range(n) for v in range(u + 1, n)], n=n)


def cycle(n):
    return Graph.from_edges([(i, (i + 1) % n) for i in range(n)], n=n)


def path(n):
    return Graph.from_edges([(i, i + 1) for i in range(n - 1)], n=n)


def star(leaves):
    return Graph.from_edges([(0, i) for i in range(1, leaves + 1)], n=leaves + 1)
