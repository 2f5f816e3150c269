"""Partition scoring: PMI topic coherence, NMI agreement, flows, summaries.

Coherence is intrinsic (word co-occurrence inside the corpus); NMI compares
a partition against another partition or an external labeling. Sankey links
and centroid summaries support inspection of how clusters relate and what
they contain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import ExternalLabeling, TokenStats, VectorCorpus
from .stability import Partition

__all__ = [
    "ClusterCoherence",
    "ClusterSummary",
    "CoherenceReport",
    "ContingencyTable",
    "cluster_coherence",
    "coherence_report",
    "contingency_table",
    "nmi",
    "pmi",
    "sankey_links",
    "summarize_clusters",
]


@dataclass(frozen=True)
class ContingencyTable:
    """Co-assignment counts between two labelings of the same documents."""

    counts: np.ndarray  # (|T|, |C|) int64
    row_labels: tuple
    col_labels: tuple


@dataclass(frozen=True)
class ClusterCoherence:
    cluster: int
    size: int
    top_words: tuple[str, ...]
    median_pmi: float | None
    n_defined_pairs: int
    n_excluded_pairs: int


@dataclass(frozen=True)
class CoherenceReport:
    """Per-cluster coherence plus the size-weighted aggregate over scored clusters."""

    per_cluster: tuple[ClusterCoherence, ...]
    aggregate: float | None
    top_n: int


@dataclass(frozen=True)
class ClusterSummary:
    cluster: int
    size: int
    centroid: np.ndarray
    nearest_docs: tuple[tuple[str, float], ...]  # (doc_id, cosine), best first


def pmi(stats: TokenStats, w1: str, w2: str) -> float | None:
    """Pointwise mutual information of two words, natural log.

    Probabilities come from document incidence: P(w) is the fraction of
    documents containing w, P(w1 w2) the fraction containing both. Returns
    None when the words never co-occur (no smoothing; the caller excludes
    such pairs).
    """
    i1 = stats.word_index(w1)
    i2 = stats.word_index(w2)
    inc = stats.incidence
    col1 = np.asarray(inc[:, i1].todense(), dtype=np.int64).ravel()
    col2 = np.asarray(inc[:, i2].todense(), dtype=np.int64).ravel()
    co = int((col1 & col2).sum())
    if co == 0:
        return None
    n = stats.n
    df1, df2 = int(col1.sum()), int(col2.sum())
    return math.log((co / n) / ((df1 / n) * (df2 / n)))


def _top_words(stats: TokenStats, members: np.ndarray, top_n: int) -> np.ndarray:
    """Vocabulary indices of the top_n words by within-cluster token count.

    Ties break lexicographically; the vocabulary is sorted, so index order
    is lexicographic order. Words absent from the cluster never qualify.
    """
    totals = np.asarray(stats.counts[members].sum(axis=0)).ravel()
    order = np.lexsort((np.arange(totals.size), -totals))
    order = order[totals[order] > 0]
    return order[:top_n]


def _pairwise_pmi(stats: TokenStats, word_idx: np.ndarray) -> tuple[list[float], int]:
    """PMI over all defined unordered pairs; returns (values, n_excluded)."""
    cols = np.asarray(stats.incidence[:, word_idx].todense(), dtype=np.int64)
    co = cols.T @ cols
    df = np.diagonal(co)
    n = stats.n
    values: list[float] = []
    excluded = 0
    k = word_idx.size
    for a in range(k):
        for b in range(a + 1, k):
            if co[a, b] == 0:
                excluded += 1
            else:
                values.append(math.log((co[a, b] / n) / ((df[a] / n) * (df[b] / n))))
    return values, excluded


def cluster_coherence(
    stats: TokenStats, p: Partition, cluster: int, top_n: int = 15
) -> tuple[tuple[str, ...], float | None]:
    """Top words of one cluster and the median PMI over their defined pairs.

    None when fewer than two usable words exist or no pair co-occurs; such
    clusters are excluded from the aggregate and reported as skipped.
    """
    if not 0 <= cluster < p.n_communities:
        raise ValueError(f"no cluster {cluster} in a {p.n_communities}-way partition")
    members = p.members(cluster)
    idx = _top_words(stats, members, top_n)
    words = tuple(stats.vocabulary[j] for j in idx)
    if idx.size < 2:
        return words, None
    values, _ = _pairwise_pmi(stats, idx)
    if not values:
        return words, None
    return words, float(np.median(values))


def coherence_report(stats: TokenStats, p: Partition, top_n: int = 15) -> CoherenceReport:
    """Score every cluster and aggregate by cluster size over the scored ones."""
    if len(stats.doc_ids) != p.n:
        raise ValueError("token stats and partition cover different document counts")
    rows: list[ClusterCoherence] = []
    for c in range(p.n_communities):
        members = p.members(c)
        idx = _top_words(stats, members, top_n)
        words = tuple(stats.vocabulary[j] for j in idx)
        if idx.size < 2:
            rows.append(ClusterCoherence(c, members.size, words, None, 0, 0))
            continue
        values, excluded = _pairwise_pmi(stats, idx)
        median = float(np.median(values)) if values else None
        rows.append(
            ClusterCoherence(c, members.size, words, median, len(values), excluded)
        )
    scored = [r for r in rows if r.median_pmi is not None]
    if scored:
        weight = sum(r.size for r in scored)
        aggregate = sum(r.size * r.median_pmi for r in scored) / weight
    else:
        aggregate = None
    return CoherenceReport(tuple(rows), aggregate, top_n)


def contingency_table(p1: Partition, p2: Partition) -> ContingencyTable:
    if p1.n != p2.n:
        raise ValueError(f"partition lengths differ: {p1.n} vs {p2.n}")
    joint = p1.assignment * p2.n_communities + p2.assignment
    counts = np.bincount(joint, minlength=p1.n_communities * p2.n_communities)
    counts = counts.reshape(p1.n_communities, p2.n_communities).astype(np.int64)
    return ContingencyTable(
        counts, tuple(range(p1.n_communities)), tuple(range(p2.n_communities))
    )


def _as_partition(p: Partition | ExternalLabeling) -> Partition:
    if isinstance(p, ExternalLabeling):
        return Partition.from_labels(p.assignment())
    return p


def nmi(p1: Partition | ExternalLabeling, p2: Partition | ExternalLabeling) -> float | None:
    """Mutual information normalized by the geometric mean of the entropies.

    Natural logs; result clipped into [0, 1]. None (undefined, never 0) when
    either side has a single class and hence zero entropy. An
    ExternalLabeling argument must already be aligned to the partition's
    document order (load it against the same corpus).
    """
    a, b = _as_partition(p1), _as_partition(p2)
    table = contingency_table(a, b)
    pij = table.counts / a.n
    p_rows = pij.sum(axis=1)
    p_cols = pij.sum(axis=0)
    h1 = float(-np.sum(p_rows[p_rows > 0] * np.log(p_rows[p_rows > 0])))
    h2 = float(-np.sum(p_cols[p_cols > 0] * np.log(p_cols[p_cols > 0])))
    if h1 == 0.0 or h2 == 0.0:
        return None
    nz = pij > 0
    mi = float(np.sum(pij[nz] * np.log(pij[nz] / np.outer(p_rows, p_cols)[nz])))
    return min(max(mi / math.sqrt(h1 * h2), 0.0), 1.0)


def sankey_links(p_fine: Partition, p_coarse: Partition) -> list[tuple[int, int, int]]:
    """Nonzero contingency cells as (fine id, coarse id, doc count) flows."""
    table = contingency_table(p_fine, p_coarse)
    links: list[tuple[int, int, int]] = []
    for i, j in zip(*np.nonzero(table.counts)):
        links.append((int(i), int(j), int(table.counts[i, j])))
    return links


def summarize_clusters(corpus: VectorCorpus, p: Partition, n_nearest: int = 3) -> list[ClusterSummary]:
    """Per-cluster centroid and the corpus documents nearest to it by cosine.

    Ties in cosine resolve to the lower document index. A zero centroid
    (exactly cancelling members) yields cosine 0 against every document.
    """
    if corpus.n != p.n:
        raise ValueError("corpus and partition cover different document counts")
    norms = np.linalg.norm(corpus.vectors, axis=1)
    unit = corpus.vectors / norms[:, None]
    summaries: list[ClusterSummary] = []
    for c in range(p.n_communities):
        members = p.members(c)
        centroid = corpus.vectors[members].mean(axis=0)
        c_norm = np.linalg.norm(centroid)
        if c_norm == 0.0:
            cos = np.zeros(corpus.n)
        else:
            cos = unit @ (centroid / c_norm)
        order = np.lexsort((np.arange(corpus.n), -cos))[:n_nearest]
        nearest = tuple((corpus.doc_ids[i], float(cos[i])) for i in order)
        summaries.append(ClusterSummary(c, members.size, centroid, nearest))
    return summaries
