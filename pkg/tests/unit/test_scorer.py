"""Tests for ranking images by model score."""

import shutil

import numpy as np
import pytest

from src.models import DenseLayer, ExtractorMismatchWarning, RankerModel
from src.services.exporter import save_image
from src.services.extractors import ANALYTIC_FEATURES, load_extractors
from src.services.network import init_model
from src.services.scorer import score_images

AESTHETIC, TECHNICAL = load_extractors("analytic")
IDENTITY = "analytic-aesthetic+analytic-technical"


def _sharpness_model() -> RankerModel:
    """Linear model scoring the aesthetic head's Laplacian variance."""
    model = init_model(55, (4,), seed=0, extractor=IDENTITY)
    weight = [[0.0] for _ in range(55)]
    weight[ANALYTIC_FEATURES.index("laplacian_var")] = [1.0]
    return RankerModel(
        layers=[DenseLayer(np.array(weight), np.zeros(1))],
        normalizer=model.normalizer,
        extractor=IDENTITY,
    )


class TestScoreImages:
    def test_single_image(self, image_file):
        model = init_model(55, (4,), seed=0, extractor=IDENTITY)
        result = score_images(model, AESTHETIC, TECHNICAL, [image_file], threads=1)
        assert len(result.ranked) == 1
        assert result.ranked[0][0] == str(image_file)
        assert result.errors == []

    def test_identical_files_tie_in_path_order(self, image_file, temp_dir):
        copy = temp_dir / "a_copy.png"
        shutil.copy(image_file, copy)
        model = init_model(55, (4,), seed=0, extractor=IDENTITY)
        result = score_images(model, AESTHETIC, TECHNICAL, [image_file, copy], threads=2)
        (first, s1), (second, s2) = result.ranked
        assert s1 == s2
        assert (first, second) == (str(copy), str(image_file))

    def test_sorted_best_first(self, temp_dir, color_image, gray_image, random_image):
        paths = [
            save_image(gray_image, temp_dir / "gray.png"),
            save_image(color_image, temp_dir / "color.png"),
            save_image(random_image, temp_dir / "noise.png"),
        ]
        result = score_images(_sharpness_model(), AESTHETIC, TECHNICAL, paths, threads=1)
        scores = [score for _, score in result.ranked]
        assert scores == sorted(scores, reverse=True)
        assert result.ranked[-1][0] == str(paths[0])

    def test_errors_collected(self, image_file, temp_dir):
        broken = temp_dir / "broken.png"
        broken.write_bytes(b"nope")
        model = init_model(55, (4,), seed=0, extractor=IDENTITY)
        result = score_images(
            model, AESTHETIC, TECHNICAL, [broken, image_file, temp_dir / "missing.png"], threads=2
        )
        assert [path for path, _ in result.ranked] == [str(image_file)]
        assert {path for path, _ in result.errors} == {str(broken), str(temp_dir / "missing.png")}

    def test_extractor_mismatch_warns(self, image_file):
        model = init_model(55, (4,), seed=0, extractor="onnx-aesthetic:a+onnx-technical:t")
        with pytest.warns(ExtractorMismatchWarning):
            score_images(model, AESTHETIC, TECHNICAL, [image_file], threads=1)
