import numpy as np
import pytest

from wavegraph import WeightedGraph


def random_connected_graph(rng, n_max=200):
    """Random valid weighted graph: a random tree plus extra random edges,
    random positive mu and omega."""
    n = int(rng.integers(2, n_max + 1))
    edges = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    n_extra = int(rng.integers(0, max(2, n // 2)))
    for _ in range(n_extra):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            edges.add((min(int(a), int(b)), max(int(a), int(b))))
    edges = sorted(edges)
    weights = rng.uniform(0.1, 2.0, len(edges))
    mu = rng.uniform(0.2, 3.0, n)
    return WeightedGraph(mu, np.array(edges), weights)


def dense_laplacian(g, f):
    """Brute-force double loop over the dense weight matrix."""
    n = g.num_vertices
    W = np.zeros((n, n))
    edges, ws = g.edge_list()
    for (a, b), w in zip(edges, ws):
        W[a, b] = w
        W[b, a] = w
    out = np.zeros(n)
    for x in range(n):
        acc = 0.0
        for y in range(n):
            if W[x, y] > 0:
                acc += W[x, y] * (f[y] - f[x])
        out[x] = acc / g.mu[x]
    return out


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
