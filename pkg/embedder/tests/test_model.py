from __future__ import annotations

import numpy as np
import pytest

from docembed.model import EmbedConfig, infer_vector, load_model, save_model

from .conftest import tiny_model


class TestEmbedConfig:
    def test_paper_defaults(self):
        config = EmbedConfig(model="m.npz")
        assert (config.vector_size, config.epochs, config.window) == (300, 10, 5)
        assert (config.min_count, config.negative, config.sample) == (20, 5, 0.001)
        assert config.training_method == "dbow"

    def test_rejects_other_training_methods(self):
        with pytest.raises(ValueError):
            EmbedConfig(model="m.npz", training_method="dm")

    def test_rejects_bad_numbers(self):
        with pytest.raises(ValueError):
            EmbedConfig(model="m.npz", epochs=0)
        with pytest.raises(ValueError):
            EmbedConfig(model="m.npz", sample=-1.0)


class TestModelIO:
    def test_save_load_roundtrip(self, tmp_path):
        model = tiny_model()
        save_model(model, tmp_path / "m.npz")
        loaded = load_model(tmp_path / "m.npz")
        assert loaded.words.tolist() == model.words.tolist()
        assert np.array_equal(loaded.output_vectors, model.output_vectors)
        assert np.array_equal(loaded.word_counts, model.word_counts)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_model(tmp_path / "nope.npz")

    def test_dimension_mismatch(self, tmp_path):
        save_model(tiny_model(dim=16), tmp_path / "m.npz")
        with pytest.raises(ValueError, match="dimension 16"):
            load_model(tmp_path / "m.npz", expected_dim=300)

    def test_malformed_model(self, tmp_path):
        np.savez(tmp_path / "bad.npz", junk=np.arange(3))
        with pytest.raises(ValueError, match="missing model array"):
            load_model(tmp_path / "bad.npz")


class TestInferVector:
    def test_deterministic_for_fixed_seed(self):
        model = tiny_model()
        config = EmbedConfig(model="unused", vector_size=16, epochs=4)
        tokens = ["goal", "team", "score", "match", "goal"]
        v1 = infer_vector(model, tokens, config, seed=(0, 5))
        v2 = infer_vector(model, tokens, config, seed=(0, 5))
        assert np.array_equal(v1, v2)

    def test_different_seeds_differ(self):
        model = tiny_model()
        config = EmbedConfig(model="unused", vector_size=16, epochs=4)
        tokens = ["goal", "team", "score"]
        v1 = infer_vector(model, tokens, config, seed=1)
        v2 = infer_vector(model, tokens, config, seed=2)
        assert not np.array_equal(v1, v2)

    def test_finite_nonzero_even_for_oov_only_docs(self):
        model = tiny_model()
        config = EmbedConfig(model="unused", vector_size=16)
        vec = infer_vector(model, ["xylophone", "zzz"], config, seed=3)
        assert np.all(np.isfinite(vec))
        assert np.linalg.norm(vec) > 0
        assert vec.shape == (16,)

    def test_moves_toward_predicted_words(self):
        # after inference the doc vector should score its own words higher
        # than unrelated ones (sanity of the SGD direction)
        model = tiny_model()
        config = EmbedConfig(model="unused", vector_size=16, epochs=10)
        tokens = ["goal", "team", "match"] * 5
        vec = infer_vector(model, tokens, config, seed=11)
        own = np.mean([vec @ model.output_vectors[model.index[t]] for t in ("goal", "team")])
        other = np.mean([vec @ model.output_vectors[model.index[t]] for t in ("genom", "fossil")])
        assert own > other
