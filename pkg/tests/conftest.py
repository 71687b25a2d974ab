import numpy as np
import pytest

from fracgraph import Graph, build_kernel, random_connected_graph


@pytest.fixture
def k2():
    """Two vertices, one unit edge, unit measure."""
    return Graph(mu=np.ones(2), weights=np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def p3():
    """Path on three vertices, unit measure and weights."""
    w = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    return Graph(mu=np.ones(3), weights=w)


@pytest.fixture
def k5():
    """Complete graph on five vertices, unit measure and weights."""
    n = 5
    return Graph(mu=np.ones(n), weights=np.ones((n, n)) - np.eye(n))


@pytest.fixture
def k2_kernel(k2):
    return build_kernel(k2, 0.5)


@pytest.fixture
def k5_kernel(k5):
    return build_kernel(k5, 0.5)


def make_random_graph(seed, n=None, weight_range=(0.2, 5.0), mu_range=(0.2, 5.0)):
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(2, 13))
    return random_connected_graph(rng, n, weight_range, mu_range)
