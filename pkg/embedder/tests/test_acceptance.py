"""Adapter contract acceptance: emitted files must satisfy the consumer's
validators exactly, and wrapper removal must honour the frequency-2 rule."""

from __future__ import annotations

import json

import numpy as np
import pytest
from click.testing import CliRunner

from docembed.cli import main as cli_main
from docembed.corpus import load_articles
from docembed.emit import infer_vectors
from docembed.model import EmbedConfig
from docembed.preprocess import dedup_wrappers

from .conftest import QUOTE, WRAPPER

# the consumer package: its loaders are the validation contract
from docscales.corpus import load_tokens, load_vectors


@pytest.fixture(scope="module")
def emitted(articles_path, model_path, tmp_path_factory):
    outdir = tmp_path_factory.mktemp("emitted")
    corpus = dedup_wrappers(load_articles(articles_path))
    config = EmbedConfig(model=str(model_path), vector_size=16, epochs=3, seed=0)
    vectors_path, tokens_path = infer_vectors(corpus, config, outdir)
    return corpus, vectors_path, tokens_path


def test_emitted_files_pass_consumer_validation(emitted):
    corpus, vectors_path, tokens_path = emitted
    loaded = load_vectors(vectors_path)
    assert loaded.n == 100
    assert loaded.dim == 16
    assert loaded.doc_ids == tuple(a.id for a in corpus.articles)
    stats = load_tokens(tokens_path, loaded)
    assert stats.doc_ids == loaded.doc_ids
    assert stats.counts.sum() > 0


def test_wrapper_rule_on_planted_sentences(articles_path):
    corpus = load_articles(articles_path)
    planted_wrapper = sum(WRAPPER in a.text for a in corpus.articles)
    assert planted_wrapper >= 3
    cleaned = dedup_wrappers(corpus)
    assert all(WRAPPER not in a.text for a in cleaned.articles)
    kept_quote = [a.id for a in cleaned.articles if QUOTE in a.text]
    assert len(kept_quote) == 2  # frequency exactly 2: kept in both


def test_dedup_idempotent_on_fixture(articles_path):
    corpus = load_articles(articles_path)
    once = dedup_wrappers(corpus)
    twice = dedup_wrappers(once)
    assert [a.text for a in twice.articles] == [a.text for a in once.articles]


def test_emission_is_deterministic(articles_path, model_path, tmp_path):
    corpus = dedup_wrappers(load_articles(articles_path))
    config = EmbedConfig(model=str(model_path), vector_size=16, epochs=3, seed=9)
    a_vec, a_tok = infer_vectors(corpus, config, tmp_path / "a")
    b_vec, b_tok = infer_vectors(corpus, config, tmp_path / "b")
    assert a_vec.read_bytes() == b_vec.read_bytes()
    assert a_tok.read_bytes() == b_tok.read_bytes()


def test_cli_end_to_end(articles_path, model_path, tmp_path):
    runner = CliRunner()
    result = runner.invoke(cli_main, [
        "--in", str(articles_path), "--model", str(model_path),
        "--out", str(tmp_path / "out"), "--vector-size", "16", "--epochs", "2",
    ], catch_exceptions=False)
    assert result.exit_code == 0, result.output
    loaded = load_vectors(tmp_path / "out" / "vectors.csv")
    assert loaded.n == 100
    tokens_lines = (tmp_path / "out" / "tokens.jsonl").read_text().strip().splitlines()
    assert len(tokens_lines) == 100
    first = json.loads(tokens_lines[0])
    assert set(first) == {"id", "tokens"}


def test_cli_missing_model_exits_2(articles_path, tmp_path):
    runner = CliRunner()
    result = runner.invoke(cli_main, [
        "--in", str(articles_path), "--model", str(tmp_path / "none.npz"),
        "--out", str(tmp_path / "out"),
    ])
    assert result.exit_code == 2


def test_cli_wrong_dimension_exits_2(articles_path, model_path, tmp_path):
    runner = CliRunner()
    result = runner.invoke(cli_main, [
        "--in", str(articles_path), "--model", str(model_path),
        "--out", str(tmp_path / "out"), "--vector-size", "300",
    ])
    assert result.exit_code == 2
    assert "dimension" in result.output
