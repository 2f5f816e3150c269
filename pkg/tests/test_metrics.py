from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docscales.corpus import ExternalLabeling, VectorCorpus, load_tokens
from docscales.metrics import (
    cluster_coherence,
    coherence_report,
    contingency_table,
    nmi,
    pmi,
    sankey_links,
    summarize_clusters,
)
from docscales.stability import Partition

from .oracles import nmi_reference, pmi_reference


def stats_from(doc_tokens: dict[str, list[str]], tmp_path):
    path = tmp_path / "tokens.jsonl"
    with path.open("w") as fh:
        for doc_id, tokens in doc_tokens.items():
            fh.write(json.dumps({"id": doc_id, "tokens": tokens}) + "\n")
    return load_tokens(path)


class TestPmi:
    def test_perfectly_cooccurring_words(self, tmp_path):
        # both words in exactly the same 10% of documents
        docs = {f"d{i}": (["x", "y"] if i == 0 else ["z"]) for i in range(10)}
        stats = stats_from(docs, tmp_path)
        assert pmi(stats, "x", "y") == pytest.approx(math.log(10), abs=1e-10)

    def test_independent_incidence_zero(self, tmp_path):
        # P(w1w2) = P(w1) P(w2) exactly: w1 in half, w2 in half, overlap a quarter
        docs = {
            "a": ["w1", "w2"],
            "b": ["w1"],
            "c": ["w2"],
            "d": ["zz"],
        }
        stats = stats_from(docs, tmp_path)
        assert pmi(stats, "w1", "w2") == pytest.approx(0.0, abs=1e-12)

    def test_four_doc_example(self, tmp_path):
        docs = {"d1": ["w1"], "d2": ["w1", "w2"], "d3": ["w2"], "d4": ["q"]}
        stats = stats_from(docs, tmp_path)
        assert pmi(stats, "w1", "w2") == pytest.approx(0.0, abs=1e-12)

    def test_zero_cooccurrence_undefined(self, tmp_path):
        stats = stats_from({"a": ["x"], "b": ["y"]}, tmp_path)
        assert pmi(stats, "x", "y") is None

    def test_unknown_word(self, tmp_path):
        stats = stats_from({"a": ["x"], "b": ["x"]}, tmp_path)
        with pytest.raises(ValueError, match="'nope'"):
            pmi(stats, "nope", "x")

    def test_self_pmi_nonnegative(self, tmp_path):
        stats = stats_from({"a": ["x"], "b": ["x", "y"], "c": ["y"]}, tmp_path)
        assert pmi(stats, "x", "x") == pytest.approx(math.log(3 / 2), abs=1e-12)
        assert pmi(stats, "x", "x") >= 0.0

    def test_matches_reference_on_random_corpora(self, tmp_path):
        rng = np.random.default_rng(77)
        vocab = [f"w{i}" for i in range(8)]
        for trial in range(30):
            n_docs = int(rng.integers(2, 9))
            docs = {
                f"d{i}": [vocab[j] for j in rng.integers(0, 8, size=rng.integers(1, 10))]
                for i in range(n_docs)
            }
            stats = stats_from(docs, tmp_path)
            doc_tokens = list(docs.values())
            for _ in range(5):
                w1, w2 = vocab[rng.integers(0, 8)], vocab[rng.integers(0, 8)]
                if w1 not in stats.vocabulary or w2 not in stats.vocabulary:
                    continue
                want = pmi_reference(doc_tokens, w1, w2)
                got = pmi(stats, w1, w2)
                if want is None:
                    assert got is None
                else:
                    assert got == pytest.approx(want, abs=1e-12)


class TestClusterCoherence:
    def test_identical_cooccurrence_cluster(self, tmp_path):
        # 15 words all confined to the same 2 of 20 documents: every pair has
        # PMI = ln(1/p) with p = 0.1
        words = [f"t{i:02d}" for i in range(15)]
        docs = {f"d{i}": (list(words) if i < 2 else ["filler"]) for i in range(20)}
        stats = stats_from(docs, tmp_path)
        p = Partition.from_labels([0] * 2 + [1] * 18)
        top, median = cluster_coherence(stats, p, 0)
        assert set(top) == set(words)
        assert median == pytest.approx(math.log(10), abs=1e-10)

    def test_zero_cooccurrence_pair_flagged(self, tmp_path):
        docs = {"a": ["x"], "b": ["y"], "c": ["z"]}
        stats = stats_from(docs, tmp_path)
        p = Partition.from_labels([0, 0, 1])
        top, median = cluster_coherence(stats, p, 0, top_n=2)
        assert median is None

    def test_top_words_by_count_ties_lexicographic(self, tmp_path):
        docs = {"a": ["beta", "beta", "alpha", "alpha", "zeta"], "b": ["zeta"]}
        stats = stats_from(docs, tmp_path)
        p = Partition.from_labels([0, 1])
        top, _ = cluster_coherence(stats, p, 0, top_n=2)
        assert top == ("alpha", "beta")

    def test_report_aggregate_is_size_weighted(self, tmp_path):
        words_a = [f"a{i}" for i in range(3)]
        words_b = [f"b{i}" for i in range(3)]
        docs = {}
        for i in range(6):
            docs[f"x{i}"] = list(words_a)
        for i in range(2):
            docs[f"y{i}"] = list(words_b)
        stats = stats_from(docs, tmp_path)
        p = Partition.from_labels([0] * 6 + [1] * 2)
        report = coherence_report(stats, p, top_n=3)
        pa = report.per_cluster[0].median_pmi
        pb = report.per_cluster[1].median_pmi
        assert pa == pytest.approx(math.log(8 / 6), abs=1e-12)
        assert pb == pytest.approx(math.log(8 / 2), abs=1e-12)
        assert report.aggregate == pytest.approx((6 * pa + 2 * pb) / 8, abs=1e-12)

    def test_aggregate_invariant_under_relabeling(self, tmp_path):
        rng = np.random.default_rng(5)
        docs = {
            f"d{i}": [f"w{j}" for j in rng.integers(0, 10, size=6)] for i in range(12)
        }
        stats = stats_from(docs, tmp_path)
        labels = rng.integers(0, 3, size=12)
        r1 = coherence_report(stats, Partition.from_labels(labels), top_n=4)
        r2 = coherence_report(stats, Partition.from_labels(2 - labels), top_n=4)
        assert r1.aggregate == pytest.approx(r2.aggregate, abs=1e-12)

    def test_tiny_cluster_skipped_in_aggregate(self, tmp_path):
        docs = {"a": ["solo"], "b": ["x", "y"], "c": ["x", "y"]}
        stats = stats_from(docs, tmp_path)
        p = Partition.from_labels([0, 1, 1])
        report = coherence_report(stats, p)
        assert report.per_cluster[0].median_pmi is None
        assert report.aggregate == report.per_cluster[1].median_pmi


class TestNmi:
    def test_identity(self):
        p = Partition.from_labels([0, 1, 0, 2, 1, 2])
        assert nmi(p, p) == pytest.approx(1.0, abs=1e-12)

    def test_independent_partitions_zero(self):
        t = Partition.from_labels([0, 0, 1, 1])
        c = Partition.from_labels([0, 1, 0, 1])
        assert nmi(t, c) == pytest.approx(0.0, abs=1e-12)

    def test_single_class_undefined(self):
        assert nmi(Partition.all_in_one(5), Partition.from_labels([0, 1, 0, 1, 0])) is None
        assert nmi(Partition.from_labels([0, 1, 0, 1, 0]), Partition.all_in_one(5)) is None

    def test_symmetry_and_permutation_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(4, 40))
            a = Partition.from_labels(rng.integers(0, 4, size=n))
            b = Partition.from_labels(rng.integers(0, 3, size=n))
            v1, v2 = nmi(a, b), nmi(b, a)
            if v1 is None:
                assert v2 is None
                continue
            assert v1 == pytest.approx(v2, abs=1e-12)
            perm = rng.permutation(a.n_communities)
            relabeled = Partition.from_labels(perm[a.assignment])
            assert nmi(relabeled, b) == pytest.approx(v1, abs=1e-12)

    def test_matches_reference(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            n = int(rng.integers(3, 30))
            x = rng.integers(0, 4, size=n)
            y = rng.integers(0, 3, size=n)
            got = nmi(Partition.from_labels(x), Partition.from_labels(y))
            want = nmi_reference(x.tolist(), y.tolist())
            if want is None:
                assert got is None
            else:
                assert got == pytest.approx(min(max(want, 0.0), 1.0), abs=1e-12)

    def test_accepts_external_labeling(self):
        p = Partition.from_labels([0, 0, 1, 1])
        labeling = ExternalLabeling(("a", "b", "c", "d"), ("N", "N", "S", "S"))
        assert nmi(p, labeling) == pytest.approx(1.0, abs=1e-12)

    def test_bounds(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            n = int(rng.integers(3, 25))
            a = Partition.from_labels(rng.integers(0, 5, size=n))
            b = Partition.from_labels(rng.integers(0, 5, size=n))
            v = nmi(a, b)
            if v is not None:
                assert 0.0 <= v <= 1.0


class TestSankeyLinks:
    def test_identical_partitions_diagonal(self):
        p = Partition.from_labels([0, 0, 1, 1, 2])
        links = sankey_links(p, p)
        assert links == [(0, 0, 2), (1, 1, 2), (2, 2, 1)]

    def test_singletons_to_all_in_one(self):
        links = sankey_links(Partition.singletons(4), Partition.all_in_one(4))
        assert links == [(0, 0, 1), (1, 0, 1), (2, 0, 1), (3, 0, 1)]

    def test_exact_refinement_gives_fine_count_links(self):
        fine = Partition.from_labels([0, 0, 1, 1, 2, 2, 3, 3])
        coarse = Partition.from_labels([0, 0, 0, 0, 1, 1, 1, 1])
        links = sankey_links(fine, coarse)
        assert len(links) == fine.n_communities
        assert sum(v for _, _, v in links) == fine.n

    def test_flow_conservation(self):
        rng = np.random.default_rng(19)
        fine = Partition.from_labels(rng.integers(0, 6, size=40))
        coarse = Partition.from_labels(rng.integers(0, 3, size=40))
        links = sankey_links(fine, coarse)
        table = contingency_table(fine, coarse)
        assert table.counts.sum() == 40
        out_per_fine = {}
        in_per_coarse = {}
        for s, d, v in links:
            out_per_fine[s] = out_per_fine.get(s, 0) + v
            in_per_coarse[d] = in_per_coarse.get(d, 0) + v
        assert [out_per_fine[c] for c in range(fine.n_communities)] == fine.sizes().tolist()
        assert [in_per_coarse[c] for c in range(coarse.n_communities)] == coarse.sizes().tolist()


class TestSummarizeClusters:
    def test_single_doc_cluster(self):
        corpus = VectorCorpus(("a", "b"), np.array([[1.0, 0.0], [0.0, 1.0]]))
        p = Partition.from_labels([0, 1])
        summaries = summarize_clusters(corpus, p, n_nearest=1)
        assert np.allclose(summaries[0].centroid, [1, 0])
        assert summaries[0].nearest_docs[0][0] == "a"
        assert summaries[0].nearest_docs[0][1] == pytest.approx(1.0)

    def test_identical_vectors_both_returned(self):
        corpus = VectorCorpus(("a", "b", "c"), np.array([[2.0, 0.0], [2.0, 0.0], [0.0, 1.0]]))
        p = Partition.from_labels([0, 0, 1])
        summaries = summarize_clusters(corpus, p, n_nearest=2)
        assert [d for d, _ in summaries[0].nearest_docs] == ["a", "b"]

    def test_nearest_matches_brute_force(self):
        rng = np.random.default_rng(29)
        vectors = rng.normal(size=(9, 4))
        corpus = VectorCorpus(tuple(f"d{i}" for i in range(9)), vectors)
        p = Partition.from_labels(rng.integers(0, 3, size=9))
        for summary in summarize_clusters(corpus, p):
            centroid = vectors[p.members(summary.cluster)].mean(axis=0)
            cos = vectors @ centroid / (
                np.linalg.norm(vectors, axis=1) * np.linalg.norm(centroid)
            )
            want = sorted(range(9), key=lambda i: (-cos[i], i))[:3]
            assert [d for d, _ in summary.nearest_docs] == [f"d{i}" for i in want]
