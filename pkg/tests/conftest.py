from __future__ import annotations

import numpy as np
import pytest

from docscales.graph import SimilarityGraph
from docscales.kernel import build_kernel


def graph_from_edges(n: int, edge_list: list[tuple[int, int]], weight: float = 1.0) -> SimilarityGraph:
    edges = np.array(sorted(set(edge_list)), dtype=np.int64)
    return SimilarityGraph(n, edges, np.full(len(edges), weight))


def two_triangles() -> SimilarityGraph:
    """Two unit-weight triangles joined by a single bridge edge (N=6)."""
    return graph_from_edges(
        6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]
    )


def ring_of_cliques(n_cliques: int = 20, clique_size: int = 10) -> SimilarityGraph:
    """Unit-weight cliques in a ring; one inter-clique edge joins the last
    node of each clique to the first node of the next."""
    edges: list[tuple[int, int]] = []
    for c in range(n_cliques):
        base = c * clique_size
        for i in range(clique_size):
            for j in range(i + 1, clique_size):
                edges.append((base + i, base + j))
        tail = base + clique_size - 1
        head = ((c + 1) % n_cliques) * clique_size
        edges.append((min(tail, head), max(tail, head)))
    return graph_from_edges(n_cliques * clique_size, edges)


def random_connected_graph(rng: np.random.Generator, n: int, p: float = 0.5) -> SimilarityGraph:
    """Erdos-Renyi weighted graph forced connected by a random spanning chain."""
    edges: dict[tuple[int, int], float] = {}
    order = rng.permutation(n)
    for a, b in zip(order, order[1:]):
        i, j = int(min(a, b)), int(max(a, b))
        edges[(i, j)] = float(rng.uniform(0.2, 1.0))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < p:
                edges[(i, j)] = float(rng.uniform(0.2, 1.0))
    pairs = np.array(sorted(edges), dtype=np.int64)
    weights = np.array([edges[tuple(e)] for e in pairs])
    return SimilarityGraph(n, pairs, weights)


@pytest.fixture(scope="session")
def two_triangle_kernel():
    return build_kernel(two_triangles())


@pytest.fixture(scope="session")
def ring_kernel():
    return build_kernel(ring_of_cliques())
