import numpy as np
import pytest

import graphdict as gd


@pytest.fixture(scope="session")
def small_graph():
    """Connected geometric graph, N=20, fixed seed."""
    return gd.random_geometric_graph(20, 0.9, 0.5, seed=11)


@pytest.fixture(scope="session")
def small_spectrum(small_graph):
    return gd.normalized_laplacian(small_graph)


@pytest.fixture(scope="session")
def ring_graph():
    """Cycle on 24 vertices: diameter 12, good for hop-localization tests."""
    n = 24
    i = np.arange(n)
    j = (i + 1) % n
    return gd.WeightedGraph(n, i, j, np.ones(n))


@pytest.fixture(scope="session")
def ring_spectrum(ring_graph):
    return gd.normalized_laplacian(ring_graph)


def bfs_hops(graph, start):
    """Unweighted BFS hop distances from start; inf when unreachable."""
    adj = graph.adjacency()
    dist = np.full(graph.n_vertices, np.inf)
    dist[start] = 0
    frontier = [start]
    level = 0
    while frontier:
        level += 1
        nxt = []
        for u in frontier:
            for v in adj.indices[adj.indptr[u]:adj.indptr[u + 1]]:
                if dist[v] == np.inf:
                    dist[v] = level
                    nxt.append(v)
        frontier = nxt
    return dist
