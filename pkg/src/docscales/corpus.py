"""Loaders and writers for the corpus artifacts: vectors, tokens, labels.

File contracts (shared with the embedding adapter):
  - vectors.csv: UTF-8, header ``id,v0,...,v{D-1}``, decimal floats.
  - tokens.jsonl: one object per line, ``{"id": str, "tokens": [str, ...]}``.
  - labels.csv: header ``id,label``.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

UNCLASSIFIED = "Unclassified"

__all__ = [
    "CorpusFormatError",
    "CorpusWarning",
    "ExternalLabeling",
    "TokenStats",
    "UNCLASSIFIED",
    "VectorCorpus",
    "load_labels",
    "load_tokens",
    "load_vectors",
    "write_labels",
    "write_tokens",
    "write_vectors",
]


class CorpusFormatError(ValueError):
    """A corpus file violates its format contract; message carries the line number."""


class CorpusWarning(UserWarning):
    """Degenerate but accepted corpus content (e.g. a document with no tokens)."""


@dataclass(frozen=True)
class VectorCorpus:
    """Document identifiers with their embedding vectors, in file order."""

    doc_ids: tuple[str, ...]
    vectors: np.ndarray  # (N, D) float64, read-only

    def __post_init__(self) -> None:
        n = len(self.doc_ids)
        if n < 2:
            raise CorpusFormatError(f"corpus needs at least 2 documents, got {n}")
        seen: set[str] = set()
        for d in self.doc_ids:
            if d in seen:
                raise CorpusFormatError(f"duplicate doc id {d!r}")
            seen.add(d)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != n:
            raise CorpusFormatError(
                f"vector matrix shape {self.vectors.shape} does not match {n} doc ids"
            )
        if not np.all(np.isfinite(self.vectors)):
            i = int(np.argwhere(~np.isfinite(self.vectors).all(axis=1))[0, 0])
            raise CorpusFormatError(f"non-finite vector entry for doc {self.doc_ids[i]!r}")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(norms == 0.0):
            i = int(np.argmin(norms))
            raise CorpusFormatError(f"zero-norm vector for doc {self.doc_ids[i]!r}")
        self.vectors.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.doc_ids)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def index_of(self, doc_id: str) -> int:
        return self.doc_ids.index(doc_id)


@dataclass(frozen=True)
class TokenStats:
    """Per-document token statistics over a lexicographically sorted vocabulary.

    ``counts`` holds raw token counts, ``incidence`` binary presence; both are
    kept because downstream coherence scoring chooses between them.
    Row order matches the vector corpus when one was supplied at load time.
    """

    doc_ids: tuple[str, ...]
    vocabulary: tuple[str, ...]
    counts: sp.csr_matrix  # (N, V) int64
    incidence: sp.csr_matrix  # (N, V) int8, counts >= 1

    @property
    def n(self) -> int:
        return len(self.doc_ids)

    def word_index(self, word: str) -> int:
        i = int(np.searchsorted(self._vocab_array(), word))
        if i >= len(self.vocabulary) or self.vocabulary[i] != word:
            raise ValueError(f"word {word!r} not in vocabulary")
        return i

    def _vocab_array(self) -> np.ndarray:
        arr = self.__dict__.get("_vocab_cache")
        if arr is None:
            arr = np.asarray(self.vocabulary, dtype=object)
            object.__setattr__(self, "_vocab_cache", arr)
        return arr


@dataclass(frozen=True)
class ExternalLabeling:
    """One category string per document; missing documents are ``Unclassified``."""

    doc_ids: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.doc_ids) != len(self.labels):
            raise CorpusFormatError("labeling doc_ids and labels differ in length")

    @property
    def categories(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def assignment(self) -> np.ndarray:
        """Integer category codes in row order (codes follow sorted category order)."""
        cats = {c: i for i, c in enumerate(self.categories)}
        return np.array([cats[l] for l in self.labels], dtype=np.int64)


def load_vectors(path: str | Path) -> VectorCorpus:
    """Load and validate a vectors.csv file; row order is preserved."""
    path = Path(path)
    doc_ids: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError(f"{path}: empty file") from None
        if len(header) < 2 or header[0] != "id":
            raise CorpusFormatError(f"{path}: line 1: header must be id,v0,...,v{{D-1}}")
        dim = len(header) - 1
        expected = ["id"] + [f"v{i}" for i in range(dim)]
        if header != expected:
            raise CorpusFormatError(f"{path}: line 1: malformed header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dim + 1:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: expected {dim + 1} fields, got {len(row)}"
                )
            doc_id = row[0]
            if doc_id in seen:
                raise CorpusFormatError(f"{path}: line {lineno}: duplicate doc id {doc_id!r}")
            seen.add(doc_id)
            try:
                vec = [float(x) for x in row[1:]]
            except ValueError as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: {exc}") from None
            if not all(np.isfinite(vec)):
                raise CorpusFormatError(f"{path}: line {lineno}: non-finite entry")
            if not any(v != 0.0 for v in vec):
                raise CorpusFormatError(
                    f"{path}: line {lineno}: zero-norm vector for doc {doc_id!r}"
                )
            doc_ids.append(doc_id)
            rows.append(vec)
    if len(rows) < 2:
        raise CorpusFormatError(f"{path}: corpus needs at least 2 documents, got {len(rows)}")
    return VectorCorpus(tuple(doc_ids), np.array(rows, dtype=np.float64))


def write_vectors(corpus: VectorCorpus, path: str | Path) -> None:
    """Write the canonical vectors.csv form (shortest round-trip float repr)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + [f"v{i}" for i in range(corpus.dim)])
        for doc_id, vec in zip(corpus.doc_ids, corpus.vectors):
            writer.writerow([doc_id] + [repr(float(v)) for v in vec])


def load_tokens(path: str | Path, corpus: VectorCorpus | None = None) -> TokenStats:
    """Load tokens.jsonl into count/incidence matrices.

    When ``corpus`` is given, rows are reordered to its doc order; ids absent
    from the corpus are an error, corpus docs absent from the file become
    empty rows (warned, kept to preserve index alignment).
    """
    path = Path(path)
    per_doc: dict[str, dict[str, int]] = {}
    order: list[str] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict) or "id" not in obj or "tokens" not in obj:
                raise CorpusFormatError(f"{path}: line {lineno}: object needs id and tokens")
            doc_id = str(obj["id"])
            if doc_id in per_doc:
                raise CorpusFormatError(f"{path}: line {lineno}: duplicate doc id {doc_id!r}")
            tokens = obj["tokens"]
            if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
                raise CorpusFormatError(f"{path}: line {lineno}: tokens must be a string list")
            counts: dict[str, int] = {}
            for tok in tokens:
                counts[tok] = counts.get(tok, 0) + 1
            per_doc[doc_id] = counts
            order.append(doc_id)
    if corpus is not None:
        unknown = [d for d in order if d not in set(corpus.doc_ids)]
        if unknown:
            raise CorpusFormatError(f"{path}: unknown doc id {unknown[0]!r} not in corpus")
        order = list(corpus.doc_ids)
    vocabulary = tuple(sorted({w for c in per_doc.values() for w in c}))
    vocab_idx = {w: j for j, w in enumerate(vocabulary)}
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for doc_id in order:
        counts = per_doc.get(doc_id, {})
        if not counts:
            warnings.warn(f"document {doc_id!r} has no tokens", CorpusWarning, stacklevel=2)
        for w in sorted(counts):
            indices.append(vocab_idx[w])
            data.append(counts[w])
        indptr.append(len(indices))
    shape = (len(order), len(vocabulary))
    counts_mat = sp.csr_matrix(
        (np.array(data, dtype=np.int64), np.array(indices, dtype=np.int32), np.array(indptr)),
        shape=shape,
    )
    incidence = counts_mat.copy()
    incidence.data = np.ones_like(incidence.data, dtype=np.int8)
    return TokenStats(tuple(order), vocabulary, counts_mat, incidence.astype(np.int8))


def write_tokens(stats: TokenStats, path: str | Path) -> None:
    """Write the canonical tokens.jsonl form (tokens sorted within each document)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for i, doc_id in enumerate(stats.doc_ids):
            row = stats.counts.getrow(i)
            tokens: list[str] = []
            for j, c in zip(row.indices, row.data):
                tokens.extend([stats.vocabulary[j]] * int(c))
            fh.write(json.dumps({"id": doc_id, "tokens": tokens}) + "\n")


def load_labels(path: str | Path, corpus: VectorCorpus | None = None) -> ExternalLabeling:
    """Load labels.csv; with a corpus, unlabeled documents become ``Unclassified``."""
    path = Path(path)
    assigned: dict[str, str] = {}
    order: list[str] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError(f"{path}: empty file") from None
        if header != ["id", "label"]:
            raise CorpusFormatError(f"{path}: line 1: header must be id,label")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise CorpusFormatError(f"{path}: line {lineno}: expected 2 fields")
            doc_id, label = row
            if doc_id in assigned:
                if assigned[doc_id] != label:
                    raise CorpusFormatError(
                        f"{path}: line {lineno}: doc {doc_id!r} labeled both "
                        f"{assigned[doc_id]!r} and {label!r}"
                    )
                continue  # exact duplicate, deduplicate silently
            assigned[doc_id] = label
            order.append(doc_id)
    if corpus is not None:
        unknown = [d for d in order if d not in set(corpus.doc_ids)]
        if unknown:
            raise CorpusFormatError(f"{path}: unknown doc id {unknown[0]!r} not in corpus")
        doc_ids = corpus.doc_ids
        labels = tuple(assigned.get(d, UNCLASSIFIED) for d in doc_ids)
        return ExternalLabeling(doc_ids, labels)
    return ExternalLabeling(tuple(order), tuple(assigned[d] for d in order))


def write_labels(labeling: ExternalLabeling, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label"])
        for doc_id, label in zip(labeling.doc_ids, labeling.labels):
            writer.writerow([doc_id, label])
