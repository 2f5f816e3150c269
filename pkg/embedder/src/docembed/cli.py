"""The `embed` command: articles.jsonl + PV-DBOW model -> vectors.csv + tokens.jsonl."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .corpus import load_articles
from .emit import infer_vectors
from .model import EmbedConfig
from .preprocess import dedup_wrappers


@click.command()
@click.option("--in", "input_path", required=True, type=click.Path(exists=True),
              help="articles.jsonl input.")
@click.option("--model", required=True, type=click.Path(),
              help="Pre-trained PV-DBOW model (.npz).")
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
@click.option("--vector-size", type=int, default=300, show_default=True)
@click.option("--epochs", type=int, default=10, show_default=True)
@click.option("--negative", type=int, default=5, show_default=True)
@click.option("--sample", type=float, default=0.001, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--keep-wrappers", is_flag=True,
              help="Skip boilerplate-sentence removal.")
def main(input_path, model, out, vector_size, epochs, negative, sample, seed,
         keep_wrappers) -> None:
    """Embed raw articles with a pre-trained PV-DBOW model."""
    try:
        config = EmbedConfig(
            model=model, vector_size=vector_size, epochs=epochs,
            negative=negative, sample=sample, seed=seed,
        )
        corpus = load_articles(input_path)
        if not keep_wrappers:
            corpus = dedup_wrappers(corpus)
        vectors_path, tokens_path = infer_vectors(corpus, config, Path(out))
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"embedded {len(corpus)} articles -> {vectors_path}, {tokens_path}")


if __name__ == "__main__":
    main()
