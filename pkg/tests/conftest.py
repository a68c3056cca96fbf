import numpy as np
import pytest

from kirchnet.netcore import Edge, Multigraph, build_network


def net_from(edges, p="p", q="q", I=1.0, vertices=None):
    """Network from ``(id, u, v, r)`` tuples; vertices default to the endpoints in order."""
    if vertices is None:
        vertices = []
        for _, u, v, _ in edges:
            for x in (u, v):
                if x not in vertices:
                    vertices.append(x)
    return build_network(Multigraph(vertices, [Edge(*e) for e in edges]), p, q, I)


@pytest.fixture
def parallel():
    return net_from([("e1", "p", "q", 1.0), ("e2", "p", "q", 3.0)], I=4.0)


@pytest.fixture
def path13():
    return net_from([("a", "p", "x", 1.0), ("b", "x", "q", 3.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)
