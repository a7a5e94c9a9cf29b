"""Tests for the training loop."""

import json

import numpy as np
import pytest

from src.models import (
    Bucket,
    Manifest,
    NormalizerStats,
    NumericError,
    RankedPair,
    Split,
    TrainConfig,
)
from src.services.corpus import build_val_triples
from src.services.features import FeatureStore
from src.services.network import forward_batch
from src.services.trainer import (
    pair_matrices,
    train,
    triple_tensor,
    validation_accuracy,
    write_history,
)
from src.utils.progress import create_reporter
from tests.conftest import make_record

D = 8


def _toy(n_pairs=64):
    """Separable pairs (+1 over -1) and one (+1, 0, -1) validation triple."""
    x_pos = np.ones((n_pairs, D))
    x_neg = -np.ones((n_pairs, D))
    val = np.stack([np.ones(D), np.zeros(D), -np.ones(D)])[np.newaxis]
    return x_pos, x_neg, val


def _small_cfg(**overrides):
    values = {"hidden": (16, 8), "max_epochs": 5, "seed": 1}
    values.update(overrides)
    return TrainConfig(**values)


class TestTrain:
    def test_separable_toy_reaches_full_accuracy(self):
        x_pos, x_neg, val = _toy()
        result = train(x_pos, x_neg, val, TrainConfig(max_epochs=20))
        assert result.best_accuracy == 1.0
        assert result.best_epoch <= 20
        assert validation_accuracy(result.model, val) == 1.0
        assert result.losses[-1] <= result.losses[0]

    def test_deterministic(self):
        x_pos, x_neg, val = _toy()
        a = train(x_pos, x_neg, val, _small_cfg())
        b = train(x_pos, x_neg, val, _small_cfg())
        assert a.history == b.history
        for p, q in zip(a.model.parameters(), b.model.parameters()):
            np.testing.assert_array_equal(p, q)

    def test_history_has_one_record_per_epoch(self):
        x_pos, x_neg, val = _toy()
        result = train(x_pos, x_neg, val, _small_cfg(max_epochs=4))
        assert [r.epoch for r in result.history] == [1, 2, 3, 4]
        assert result.history[0].lr == 1e-3
        assert result.history[0].improved

    def test_lr_only_ever_halves(self):
        x_pos, x_neg, _ = _toy()
        # identical triple members never score strictly in order
        flat_val = np.zeros((1, 3, D))
        result = train(x_pos, x_neg, flat_val, _small_cfg(max_epochs=5, patience=1))
        assert result.learning_rates == [1e-3, 1e-3, 5e-4, 2.5e-4, 1.25e-4]
        for before, after in zip(result.learning_rates, result.learning_rates[1:]):
            assert after in (before, before * 0.5)
        assert result.best_epoch == 1

    def test_best_snapshot_is_float32_exact(self):
        x_pos, x_neg, val = _toy()
        model = train(x_pos, x_neg, val, _small_cfg()).model
        for p in model.parameters():
            np.testing.assert_array_equal(p, p.astype(np.float32).astype(np.float64))

    def test_best_accuracy_belongs_to_saved_snapshot(self, rng):
        x_pos = rng.normal(size=(48, D))
        x_neg = rng.normal(size=(48, D))
        val = rng.normal(size=(12, 3, D))
        result = train(x_pos, x_neg, val, _small_cfg(max_epochs=6))
        assert result.best_accuracy == validation_accuracy(result.model, val)

    def test_extractor_and_normalizer_recorded(self):
        x_pos, x_neg, val = _toy()
        normalizer = NormalizerStats(np.zeros(D), np.full(D, 2.0))
        result = train(x_pos, x_neg, val, _small_cfg(), normalizer=normalizer, extractor="a+t")
        assert result.model.extractor == "a+t"
        np.testing.assert_array_equal(result.model.normalizer.std, np.full(D, 2.0))

    def test_non_finite_loss_reports_position(self):
        x_pos, x_neg, val = _toy()
        x_pos[0, 0] = np.nan
        identity = NormalizerStats(np.zeros(D), np.ones(D))
        with pytest.raises(NumericError, match="epoch 1, batch 1"):
            train(x_pos, x_neg, val, _small_cfg(batch_size=64), normalizer=identity)

    def test_zero_epochs_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(max_epochs=0)

    @pytest.mark.parametrize("field", ["margin", "lr"])
    def test_non_positive_settings_rejected(self, field):
        with pytest.raises(ValueError):
            TrainConfig(**{field: 0.0})

    def test_needs_pairs_and_triples(self):
        x_pos, x_neg, val = _toy()
        with pytest.raises(ValueError):
            train(x_pos[:0], x_neg[:0], val, _small_cfg())
        with pytest.raises(ValueError):
            train(x_pos, x_neg, val[:0], _small_cfg())


class TestValidationAccuracy:
    def test_counts_three_ordered_pairs_per_triple(self):
        x_pos, x_neg, val = _toy()
        model = train(x_pos, x_neg, val, TrainConfig(max_epochs=20)).model
        swapped = val[:, [0, 2, 1]]
        # studio > bad and studio > good still hold, good > bad does not
        assert validation_accuracy(model, swapped) == pytest.approx(2 / 3)

    def test_ties_count_as_wrong(self):
        model = train(*_toy(), _small_cfg(max_epochs=1)).model
        assert validation_accuracy(model, np.zeros((2, 3, D))) == 0.0


class TestFeatureAssembly:
    def test_pair_matrices_and_triples_follow_store(self, rng):
        vectors = {k: rng.normal(size=55) for k in ("st", "g", "b")}
        store = FeatureStore.from_vectors(("a", "t"), 16, vectors)
        x_pos, x_neg = pair_matrices(store, [RankedPair("st", "b", 4), RankedPair("g", "b", 5)])
        np.testing.assert_array_equal(x_pos[1], store.get("g"))
        np.testing.assert_array_equal(x_neg[0], store.get("b"))

        manifest = Manifest(
            records=(
                make_record("b", Bucket.UGC_BAD, split=Split.VAL),
                make_record("g", Bucket.UGC_GOOD, split=Split.VAL),
                make_record("st", Bucket.STUDIO, split=Split.VAL),
            )
        )
        val = triple_tensor(store, build_val_triples(manifest))
        assert val.shape == (1, 3, 55)
        np.testing.assert_array_equal(val[0, 0], store.get("st"))
        np.testing.assert_array_equal(val[0, 2], store.get("b"))

    def test_scores_from_raw_features(self):
        x_pos, x_neg, val = _toy()
        model = train(x_pos, x_neg, val, _small_cfg()).model
        assert forward_batch(model, val[0]).shape == (3,)


def test_write_history(temp_dir):
    x_pos, x_neg, val = _toy()
    result = train(x_pos, x_neg, val, _small_cfg(max_epochs=3))
    path = temp_dir / "history.jsonl"
    assert write_history(path, result.history) == 3
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert set(lines[0]) == {"epoch", "loss", "val_accuracy", "lr", "improved"}
    assert [line["epoch"] for line in lines] == [1, 2, 3]


def test_reporter_ticks_once_per_epoch():
    x_pos, x_neg, val = _toy()
    reporter = create_reporter(1)
    train(x_pos, x_neg, val, _small_cfg(max_epochs=3), reporter=reporter)
    assert reporter.current_stage == 1
    assert reporter.stage_name == "train"
    assert create_reporter(1, quiet=True) is None
