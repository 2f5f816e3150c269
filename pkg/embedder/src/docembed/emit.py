"""Emit vectors.csv and tokens.jsonl in the clustering pipeline's formats.

The written files are the interchange contract with the consumer package:
vectors.csv has header id,v0..v{D-1} with shortest round-trip float reprs,
tokens.jsonl holds one {"id", "tokens"} object per line with the
preprocessed (stemmed) tokens sorted within each document.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .corpus import RawCorpus
from .model import EmbedConfig, infer_vector, load_model
from .preprocess import preprocess

VECTORS_CSV = "vectors.csv"
TOKENS_JSONL = "tokens.jsonl"


def infer_vectors(corpus: RawCorpus, config: EmbedConfig, outdir: str | Path) -> tuple[Path, Path]:
    """Preprocess every article, infer its vector, write both output files.

    Per-document inference seeds derive from (config.seed, row index), so a
    rerun with the same inputs is byte-identical. Returns the two paths.
    """
    if len(corpus) < 2:
        raise ValueError(f"need at least 2 articles, got {len(corpus)}")
    model = load_model(config.model, expected_dim=config.vector_size)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    vectors_path = outdir / VECTORS_CSV
    tokens_path = outdir / TOKENS_JSONL
    with vectors_path.open("w", newline="", encoding="utf-8") as vfh, \
            tokens_path.open("w", encoding="utf-8") as tfh:
        writer = csv.writer(vfh, lineterminator="\n")
        writer.writerow(["id"] + [f"v{i}" for i in range(model.dim)])
        for row, article in enumerate(corpus.articles):
            tokens = preprocess(article.text)
            vec = infer_vector(model, tokens, config, seed=(config.seed, row))
            writer.writerow([article.id] + [repr(float(x)) for x in vec])
            tfh.write(json.dumps({"id": article.id, "tokens": sorted(tokens)}) + "\n")
    return vectors_path, tokens_path
