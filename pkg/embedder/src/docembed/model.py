"""Pre-trained PV-DBOW model file handling and per-document vector inference.

Training lives elsewhere (any PV-DBOW implementation of matching dimension);
this module only consumes a model file. The .npz layout:

  words          (V,)  unicode vocabulary, stemmed forms
  output_vectors (V, D) float word output embeddings (the negative-sampling
                 target matrix, frozen during inference)
  word_counts    (V,)  int64 training-corpus frequencies, used for the noise
                 distribution and frequent-word down-sampling

Inference follows the DBOW scheme: the document vector is trained by SGD to
predict the document's words against negative samples, with the word matrix
held fixed. Fully deterministic given (model, tokens, config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Linear learning-rate decay endpoints over the inference epochs.
ALPHA_START = 0.025
ALPHA_MIN = 1e-4

# Negative samples follow the unigram distribution raised to this power.
NOISE_POWER = 0.75


@dataclass(frozen=True)
class EmbedConfig:
    """Embedding hyperparameters; defaults are the recommended DBOW settings."""

    model: str
    vector_size: int = 300
    epochs: int = 10
    window: int = 5
    min_count: int = 20
    negative: int = 5
    sample: float = 0.001
    training_method: str = "dbow"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.training_method != "dbow":
            raise ValueError(f"only dbow inference is supported, got {self.training_method!r}")
        if self.vector_size < 1 or self.epochs < 1 or self.negative < 0:
            raise ValueError("vector_size and epochs must be >= 1, negative >= 0")
        if self.sample < 0:
            raise ValueError(f"sample must be >= 0, got {self.sample}")


@dataclass
class PVDBOWModel:
    words: np.ndarray  # (V,) str
    output_vectors: np.ndarray  # (V, D) float64
    word_counts: np.ndarray  # (V,) int64
    index: dict[str, int] = field(init=False)
    noise_cdf: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if self.output_vectors.ndim != 2 or len(self.words) != self.output_vectors.shape[0]:
            raise ValueError("output_vectors must be (V, D) matching the vocabulary")
        if len(self.word_counts) != len(self.words):
            raise ValueError("word_counts must match the vocabulary length")
        if np.any(self.word_counts <= 0):
            raise ValueError("word_counts must be positive")
        self.index = {w: i for i, w in enumerate(self.words.tolist())}
        weights = self.word_counts.astype(np.float64) ** NOISE_POWER
        self.noise_cdf = np.cumsum(weights / weights.sum())

    @property
    def dim(self) -> int:
        return int(self.output_vectors.shape[1])

    def keep_probability(self, sample: float) -> np.ndarray:
        """Down-sampling retention probability per word (1 when sample == 0)."""
        if sample <= 0:
            return np.ones(len(self.words))
        freq = self.word_counts / self.word_counts.sum()
        keep = (np.sqrt(freq / sample) + 1.0) * (sample / freq)
        return np.minimum(keep, 1.0)


def save_model(model: PVDBOWModel, path: str | Path) -> None:
    np.savez(
        path,
        words=np.asarray(model.words, dtype=np.str_),
        output_vectors=model.output_vectors,
        word_counts=model.word_counts,
    )


def load_model(path: str | Path, expected_dim: int | None = None) -> PVDBOWModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file {path} not found")
    with np.load(path, allow_pickle=False) as data:
        try:
            model = PVDBOWModel(
                data["words"],
                np.asarray(data["output_vectors"], dtype=np.float64),
                np.asarray(data["word_counts"], dtype=np.int64),
            )
        except KeyError as exc:
            raise ValueError(f"{path}: missing model array {exc}") from None
    if expected_dim is not None and model.dim != expected_dim:
        raise ValueError(
            f"{path}: model dimension {model.dim} does not match configured "
            f"vector_size {expected_dim}"
        )
    return model


def infer_vector(
    model: PVDBOWModel,
    tokens: list[str],
    config: EmbedConfig,
    seed,
) -> np.ndarray:
    """Infer one document vector by seeded SGD against the frozen word matrix.

    Out-of-vocabulary tokens are ignored; a document with no known tokens
    keeps its random initialization. The returned vector is always finite
    with nonzero norm.
    """
    rng = np.random.default_rng(seed)
    d = model.dim
    vec = (rng.random(d) - 0.5) / d
    word_idx = np.array([model.index[t] for t in tokens if t in model.index], dtype=np.int64)
    if word_idx.size:
        keep = model.keep_probability(config.sample)
        out = model.output_vectors
        for epoch in range(config.epochs):
            frac = epoch / max(config.epochs - 1, 1)
            alpha = ALPHA_START - (ALPHA_START - ALPHA_MIN) * frac
            for wi in word_idx:
                if keep[wi] < 1.0 and rng.random() > keep[wi]:
                    continue
                f = 1.0 / (1.0 + np.exp(-out[wi] @ vec))
                vec += (1.0 - f) * alpha * out[wi]
                if config.negative:
                    draws = np.searchsorted(model.noise_cdf, rng.random(config.negative))
                    for ni in draws:
                        if ni == wi:
                            continue
                        f = 1.0 / (1.0 + np.exp(-out[ni] @ vec))
                        vec -= f * alpha * out[ni]
    if not np.all(np.isfinite(vec)):
        raise FloatingPointError("inference diverged to non-finite values")
    if np.linalg.norm(vec) == 0.0:
        vec[0] = 1e-8  # zero-norm vectors violate the corpus contract
    return vec
