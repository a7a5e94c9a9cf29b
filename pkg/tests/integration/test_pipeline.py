"""Desk-scale run of the whole pipeline on the procedural corpus.

Pairs are generated from the train split, the ranker is trained on analytic
features, and the trained model is compared with both expected-score
baselines on held-out (original, distorted) pairs from an unseen corpus.
"""

import numpy as np
import pytest

from src.models import Bucket, DistortionKind, DistortionSpec, PairConfig, Split, TrainConfig
from src.services.corpus import build_val_triples, filter_split
from src.services.distortion import distort_chain, sample_chain
from src.services.evaluation import BaselineKind, baseline_score, ranked_pair_accuracy
from src.services.exporter import save_image
from src.services.extractors import extractor_identity, load_extractors
from src.services.features import build_feature_store, extract_image, fit_normalizer
from src.services.fixtures import make_fixture_corpus
from src.services.loader import load_image
from src.services.network import forward_batch
from src.services.pairgen import build_pairs, class_counts, materialize
from src.services.scorer import score_images
from src.services.trainer import pair_matrices, train, triple_tensor
from src.utils.rng import derive_seed

AESTHETIC, TECHNICAL = load_extractors("analytic")
CHAINS_PER_IMAGE = 3


@pytest.fixture(scope="module")
def trained(fixture_corpus, tmp_path_factory):
    root, manifest = fixture_corpus
    run = tmp_path_factory.mktemp("pipeline")
    train_split = filter_split(manifest, Split.TRAIN)

    pairs = build_pairs(train_split, PairConfig.distortion_heavy(n_pairs=1500, seed=0))
    materialized = materialize(pairs, train_split, root, run, threads=2)

    items = {r.id: root / r.path for r in manifest.records}
    for pair in materialized.pairs:
        items.setdefault(pair.neg_id, pair.neg_path)
    store, errors = build_feature_store(items, AESTHETIC, TECHNICAL, threads=2)
    assert errors == []

    x_pos, x_neg = pair_matrices(store, materialized.pairs)
    keys = sorted({p.pos_id for p in materialized.pairs} | {p.neg_id for p in materialized.pairs})
    result = train(
        x_pos,
        x_neg,
        triple_tensor(store, build_val_triples(manifest)),
        TrainConfig(hidden=(64, 32), max_epochs=25, seed=0),
        normalizer=fit_normalizer(store.matrix(keys)),
        extractor=store.extractor,
    )
    return materialized.pairs, result


@pytest.fixture(scope="module")
def held_out_pairs(tmp_path_factory):
    """Feature vectors of (original, distorted) pairs from an unseen corpus."""
    root = tmp_path_factory.mktemp("held_out")
    manifest = make_fixture_corpus(root, seed=1, n_styles=8)
    originals, distorted = [], []
    for record in manifest.records:
        if record.bucket is Bucket.UGC_BAD:
            continue
        img = load_image(root / record.path)
        clean = extract_image(img, AESTHETIC, TECHNICAL)
        for k in range(CHAINS_PER_IMAGE):
            chain = sample_chain(derive_seed(1, record.id, k))
            originals.append(clean)
            distorted.append(extract_image(distort_chain(img, chain), AESTHETIC, TECHNICAL))
    return originals, distorted


def test_distortion_classes_dominate(trained):
    pairs, _ = trained
    counts = class_counts(pairs)
    assert counts[1] + counts[2] > sum(counts.values()) / 2


def test_validation_accuracy_recorded(trained):
    _, result = trained
    assert result.model.extractor == extractor_identity(AESTHETIC, TECHNICAL)
    assert 0.0 <= result.best_accuracy <= 1.0
    assert len(result.history) == 25


def test_model_beats_baselines_on_held_out_pairs(trained, held_out_pairs):
    _, result = trained
    originals, distorted = held_out_pairs
    assert len(originals) == 24 * CHAINS_PER_IMAGE

    model_accuracy = ranked_pair_accuracy(
        forward_batch(result.model, np.stack([v.values for v in originals])),
        forward_batch(result.model, np.stack([v.values for v in distorted])),
    )
    assert model_accuracy >= 0.90

    for kind in BaselineKind:
        baseline_accuracy = ranked_pair_accuracy(
            [baseline_score(kind, v.distribution(kind.value)) for v in originals],
            [baseline_score(kind, v.distribution(kind.value)) for v in distorted],
        )
        assert model_accuracy >= baseline_accuracy + 0.10, kind.value


def test_original_ranked_above_grayscale_blur_copy(trained, color_image, temp_dir):
    _, result = trained
    chain = [
        DistortionSpec(DistortionKind.GRAYSCALE),
        DistortionSpec(DistortionKind.GAUSSIAN_BLUR, param=1.0),
    ]
    original = save_image(color_image, temp_dir / "original.png")
    copy = save_image(distort_chain(color_image, chain), temp_dir / "copy.png")

    ranked = score_images(result.model, AESTHETIC, TECHNICAL, [copy, original], threads=1).ranked
    assert [path for path, _ in ranked] == [str(original), str(copy)]
