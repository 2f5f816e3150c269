"""Sparse geometric similarity graph over documents: cosine similarity + MST-kNN.

The graph is the union of the minimum spanning tree of the cosine distance
(d = 1 - similarity) with each node's k most-similar neighbours. The MST part
guarantees global connectivity, the kNN part preserves local geometry.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .corpus import VectorCorpus

# MST edges with non-positive similarity keep this weight so the random walk
# stays irreducible; kNN edges with similarity <= 0 are dropped outright.
MST_WEIGHT_FLOOR = 1e-9

__all__ = [
    "MST_WEIGHT_FLOOR",
    "SimilarityGraph",
    "build_mst_knn",
    "cosine_similarity",
    "load_graph",
    "save_graph",
]


@dataclass(frozen=True)
class SimilarityGraph:
    """Undirected weighted graph; edges stored once with i < j."""

    n_nodes: int
    edges: np.ndarray  # (E, 2) int64, i < j, lexicographically sorted
    weights: np.ndarray  # (E,) float64, all > 0

    def __post_init__(self) -> None:
        if self.edges.shape[0] != self.weights.shape[0]:
            raise ValueError("edges and weights differ in length")
        if self.edges.size and (
            np.any(self.edges[:, 0] >= self.edges[:, 1])
            or np.any(self.edges < 0)
            or np.any(self.edges >= self.n_nodes)
        ):
            raise ValueError("edges must satisfy 0 <= i < j < n_nodes")
        if np.any(self.weights <= 0.0):
            raise ValueError("edge weights must be positive")
        self.edges.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric nonnegative adjacency matrix."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        a = sp.coo_matrix(
            (np.concatenate([self.weights, self.weights]),
             (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self.n_nodes, self.n_nodes),
        )
        return a.tocsr()

    def is_connected(self) -> bool:
        n_comp, _ = sp.csgraph.connected_components(self.adjacency(), directed=False)
        return n_comp == 1


def cosine_similarity(corpus: VectorCorpus) -> np.ndarray:
    """Pairwise cosine similarity matrix, exactly symmetric with unit diagonal.

    Each unordered pair is computed once and mirrored, so S == S.T bitwise.
    """
    v = corpus.vectors / np.linalg.norm(corpus.vectors, axis=1, keepdims=True)
    s = v @ v.T
    np.clip(s, -1.0, 1.0, out=s)
    upper = np.triu(s, 1)
    s = upper + upper.T
    np.fill_diagonal(s, 1.0)
    return s


def _mst_edges(dist: np.ndarray) -> list[tuple[int, int]]:
    """Prim's algorithm on a dense distance matrix.

    Ties resolve to the lowest node index (via argmin), which keeps the edge
    set reproducible across runs and platforms.
    """
    n = dist.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best_dist = np.full(n, np.inf)
    best_from = np.zeros(n, dtype=np.int64)
    in_tree[0] = True
    best_dist[0] = np.inf  # never selected again
    np.minimum(best_dist, dist[0], out=best_dist)
    best_dist[0] = np.inf
    edges: list[tuple[int, int]] = []
    for _ in range(n - 1):
        nxt = int(np.argmin(best_dist))
        a, b = int(best_from[nxt]), nxt
        edges.append((min(a, b), max(a, b)))
        in_tree[nxt] = True
        improved = dist[nxt] < best_dist
        improved[in_tree] = False
        best_from[improved] = nxt
        best_dist[improved] = dist[nxt][improved]
        best_dist[nxt] = np.inf
    return edges


def build_mst_knn(sim: np.ndarray, k: int) -> SimilarityGraph:
    """Union of MST(1 - sim) and per-node k-nearest-neighbour edges.

    kNN lists are directed then symmetrized by union; neighbour ties resolve
    to the lower node index. kNN edges with similarity <= 0 are dropped,
    MST edges keep at least MST_WEIGHT_FLOOR.
    """
    n = sim.shape[0]
    if n < 2:
        raise ValueError("graph needs at least 2 nodes")
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    weight_of: dict[tuple[int, int], float] = {}
    # kNN part: per row, order by similarity descending, index ascending.
    order = np.lexsort((np.arange(n)[None, :].repeat(n, axis=0), -sim), axis=1)
    for i in range(n):
        taken = 0
        for j in order[i]:
            j = int(j)
            if j == i:
                continue
            if taken >= k or sim[i, j] <= 0.0:
                break  # candidates only get less similar from here
            taken += 1
            e = (i, j) if i < j else (j, i)
            weight_of[e] = float(sim[e])
    # MST part over d = 1 - sim; floor keeps connectivity when sim <= 0.
    for e in _mst_edges(1.0 - sim):
        weight_of[e] = max(float(sim[e]), MST_WEIGHT_FLOOR)
    edges = np.array(sorted(weight_of), dtype=np.int64).reshape(-1, 2)
    weights = np.array([weight_of[tuple(e)] for e in edges], dtype=np.float64)
    return SimilarityGraph(n, edges, weights)


def save_graph(
    graph: SimilarityGraph,
    edges_path: str | Path,
    meta_path: str | Path,
    doc_ids: tuple[str, ...],
    params: dict | None = None,
) -> None:
    """Write the edge-list CSV plus a JSON metadata sidecar."""
    edges_path, meta_path = Path(edges_path), Path(meta_path)
    with edges_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i", "j", "weight"])
        for (i, j), w in zip(graph.edges, graph.weights):
            writer.writerow([int(i), int(j), repr(float(w))])
    meta = {
        "n_nodes": graph.n_nodes,
        "n_edges": graph.n_edges,
        "doc_ids": list(doc_ids),
        "construction": dict(params or {}),
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_graph(
    edges_path: str | Path, meta_path: str | Path
) -> tuple[SimilarityGraph, tuple[str, ...], dict]:
    """Inverse of save_graph; returns (graph, doc_ids, construction params)."""
    meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    edges: list[tuple[int, int]] = []
    weights: list[float] = []
    with Path(edges_path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["i", "j", "weight"]:
            raise ValueError(f"{edges_path}: header must be i,j,weight")
        for row in reader:
            edges.append((int(row[0]), int(row[1])))
            weights.append(float(row[2]))
    graph = SimilarityGraph(
        int(meta["n_nodes"]),
        np.array(edges, dtype=np.int64).reshape(-1, 2),
        np.array(weights, dtype=np.float64),
    )
    return graph, tuple(meta["doc_ids"]), dict(meta.get("construction", {}))
