from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docscales.corpus import VectorCorpus
from docscales.graph import (
    MST_WEIGHT_FLOOR,
    build_mst_knn,
    cosine_similarity,
    load_graph,
    save_graph,
)

from .oracles import kruskal_mst, nearest_neighbors


def corpus_of(rows) -> VectorCorpus:
    arr = np.array(rows, dtype=np.float64)
    return VectorCorpus(tuple(f"d{i}" for i in range(len(arr))), arr)


class TestCosineSimilarity:
    def test_identical_vectors(self):
        s = cosine_similarity(corpus_of([[3, 4], [3, 4]]))
        assert s[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        s = cosine_similarity(corpus_of([[1, 0], [0, 1]]))
        assert s[0, 1] == pytest.approx(0.0, abs=1e-12)

    def test_45_degrees(self):
        s = cosine_similarity(corpus_of([[1, 0], [1, 1]]))
        assert s[0, 1] == pytest.approx(0.70710678118654752, abs=1e-12)

    def test_exactly_symmetric_unit_diagonal(self):
        rng = np.random.default_rng(3)
        s = cosine_similarity(corpus_of(rng.normal(size=(17, 5))))
        assert np.array_equal(s, s.T)
        assert np.all(np.diagonal(s) == 1.0)
        assert np.all((s >= -1.0) & (s <= 1.0))


def angles_corpus(angles_deg) -> VectorCorpus:
    a = np.deg2rad(np.asarray(angles_deg, dtype=float))
    return corpus_of(np.stack([np.cos(a), np.sin(a)], axis=1))


class TestBuildMstKnn:
    def test_chain_with_k1_gives_path(self):
        # four vectors at increasing angles: similarity falls off with index gap
        sim = cosine_similarity(angles_corpus([0, 25, 55, 80]))
        graph = build_mst_knn(sim, k=1)
        got = {tuple(e) for e in graph.edges}
        mst = kruskal_mst(1.0 - sim)
        knn = nearest_neighbors(sim, 1)
        assert got == mst | knn == {(0, 1), (1, 2), (2, 3)}

    def test_k_equals_n_minus_1_complete(self):
        rng = np.random.default_rng(0)
        sim = cosine_similarity(corpus_of(rng.normal(size=(6, 3))))
        graph = build_mst_knn(np.abs(sim), k=5)  # all-positive sims
        assert graph.n_edges == 15

    def test_union_matches_oracles(self):
        rng = np.random.default_rng(8)
        sim = cosine_similarity(corpus_of(rng.normal(size=(12, 4))))
        for k in (1, 3, 5):
            got = {tuple(e) for e in build_mst_knn(sim, k).edges}
            want = kruskal_mst(1.0 - sim) | {
                e for e in nearest_neighbors(sim, k) if sim[e] > 0
            }
            assert got == want

    def test_k_out_of_range(self):
        sim = cosine_similarity(corpus_of([[1, 0], [0, 1], [1, 1]]))
        with pytest.raises(ValueError):
            build_mst_knn(sim, 0)
        with pytest.raises(ValueError):
            build_mst_knn(sim, 3)

    def test_negative_similarity_handling(self):
        # opposite vectors: the only path to connectivity is the MST floor
        sim = cosine_similarity(angles_corpus([0, 90, 180]))
        graph = build_mst_knn(sim, k=2)
        assert graph.is_connected()
        weights = {tuple(e): w for e, w in zip(graph.edges, graph.weights)}
        assert all(w > 0 for w in weights.values())
        # the 0-180 pair has similarity -1: never a kNN edge, floored if MST
        for e, w in weights.items():
            if sim[e] <= 0:
                assert w == MST_WEIGHT_FLOOR

    def test_edge_monotonicity_in_k(self):
        rng = np.random.default_rng(21)
        sim = cosine_similarity(corpus_of(rng.normal(size=(30, 6))))
        previous: set = set()
        for k in range(1, 12):
            current = {tuple(e) for e in build_mst_knn(sim, k).edges}
            assert previous <= current
            previous = current

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(min_value=2, max_value=40),
        k=st.integers(min_value=1, max_value=13),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_always_connected(self, n, k, seed):
        rng = np.random.default_rng(seed)
        sim = cosine_similarity(corpus_of(rng.normal(size=(n, 3))))
        graph = build_mst_knn(sim, min(k, n - 1))
        assert graph.is_connected()
        adj = graph.adjacency()
        assert (adj != adj.T).nnz == 0

    def test_save_load_roundtrip(self, tmp_path):
        rng = np.random.default_rng(4)
        sim = cosine_similarity(corpus_of(rng.normal(size=(9, 3))))
        graph = build_mst_knn(sim, 3)
        doc_ids = tuple(f"d{i}" for i in range(9))
        save_graph(graph, tmp_path / "e.csv", tmp_path / "m.json", doc_ids, {"k": 3})
        loaded, ids, params = load_graph(tmp_path / "e.csv", tmp_path / "m.json")
        assert ids == doc_ids
        assert params == {"k": 3}
        assert np.array_equal(loaded.edges, graph.edges)
        assert np.array_equal(loaded.weights, graph.weights)
