from __future__ import annotations

import json

import numpy as np
import pytest

from docembed.model import PVDBOWModel, save_model
from docembed.preprocess import preprocess

VOCAB_SOURCE = [
    "match", "goal", "coach", "league", "score", "team", "final", "season",
    "cell", "genome", "theory", "quantum", "neuron", "orbit", "enzyme",
    "fossil", "report", "year", "public", "study", "player", "energy",
]

WRAPPER = "Subscribe to our newsletter for daily updates."
QUOTE = "We are delighted to confirm the announcement."


def tiny_model(dim: int = 16, seed: int = 42) -> PVDBOWModel:
    rng = np.random.default_rng(seed)
    stems = sorted({s for w in VOCAB_SOURCE for s in preprocess(w)})
    return PVDBOWModel(
        np.array(stems),
        rng.normal(scale=0.5, size=(len(stems), dim)),
        rng.integers(25, 500, size=len(stems)).astype(np.int64),
    )


@pytest.fixture(scope="session")
def model_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "dbow.npz"
    save_model(tiny_model(), path)
    return path


def make_articles(n: int = 100, seed: int = 7) -> list[dict]:
    """Synthetic articles: topical sentences, a boilerplate wrapper planted in
    many articles, and a quotation planted in exactly two."""
    rng = np.random.default_rng(seed)
    articles = []
    for i in range(n):
        n_sentences = int(rng.integers(2, 6))
        sentences = []
        for _ in range(n_sentences):
            words = [VOCAB_SOURCE[j] for j in rng.integers(0, len(VOCAB_SOURCE), size=6)]
            sentences.append((" ".join(words)).capitalize() + ".")
        if i % 4 == 0:
            sentences.append(WRAPPER)
        if i in (10, 57):
            sentences.append(QUOTE)
        articles.append({
            "id": f"art{i:03d}",
            "text": " ".join(sentences),
            "timestamp": f"2016-{1 + i % 12:02d}-01",
        })
    return articles


@pytest.fixture(scope="session")
def articles_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("articles") / "articles.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for record in make_articles():
            fh.write(json.dumps(record) + "\n")
    return path
