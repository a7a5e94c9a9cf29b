"""Tests for the analytic extractor and the extractor contract."""

import numpy as np
import pytest

from src.models import (
    ContractViolationError,
    DistortionKind,
    DistortionSpec,
    ExtractorUnavailableError,
    RgbImage,
    ScoreDistribution,
)
from src.services import extractors
from src.services.distortion import apply_distortion
from src.services.extractors import (
    ANALYTIC_DIM,
    ANALYTIC_FEATURES,
    AnalyticExtractor,
    FeatureExtractor,
    OnnxExtractor,
    analytic_extract,
    analytic_projection,
    check_extractor_contract,
    colorfulness,
    extractor_identity,
    load_extractors,
    resolve_model_path,
)


def _feature(embedding, name):
    return embedding[ANALYTIC_FEATURES.index(name)]


class FlakyExtractor(FeatureExtractor):
    """Returns different embeddings on every call."""

    name = "flaky"
    embed_dim = 4
    role = "aesthetic"

    def __init__(self):
        self.calls = 0

    def run(self, img):
        self.calls += 1
        return np.full(4, float(self.calls)), ScoreDistribution.uniform()


class ShortExtractor(FeatureExtractor):
    """Declares 4 embedding values but returns 3."""

    name = "short"
    embed_dim = 4
    role = "technical"

    def run(self, img):
        return np.zeros(3), ScoreDistribution.uniform()


class TestAnalyticExtract:
    def test_constant_image_has_no_structure(self, gray_image):
        embedding, _ = analytic_extract(gray_image)
        assert embedding.shape == (ANALYTIC_DIM,)
        for name in ("laplacian_var", "edge_density", "colorfulness", "std_r"):
            assert _feature(embedding, name) == 0.0
        assert _feature(embedding, "std_luma") < 1e-12
        assert _feature(embedding, "mean_luma") == pytest.approx(0.5)

    def test_deterministic(self, color_image):
        a, dist_a = analytic_extract(color_image, "technical")
        b, dist_b = analytic_extract(color_image, "technical")
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(dist_a.probs, dist_b.probs)

    def test_red_is_more_colorful_than_its_grayscale(self):
        red = RgbImage.constant(16, 16, (1.0, 0.0, 0.0))
        gray = apply_distortion(red, DistortionSpec(DistortionKind.GRAYSCALE))
        assert colorfulness(red.pixels) > colorfulness(gray.pixels) == 0.0

    def test_distribution_is_valid(self, random_image):
        for role in ("aesthetic", "technical"):
            _, dist = analytic_extract(random_image, role)
            assert dist.probs.shape == (10,)
            assert abs(dist.probs.sum() - 1.0) < 1e-5

    def test_blur_lowers_sharpness(self, color_image):
        blurred = apply_distortion(color_image, DistortionSpec(DistortionKind.GAUSSIAN_BLUR, 1.2))
        sharp, _ = analytic_extract(color_image)
        soft, _ = analytic_extract(blurred)
        assert _feature(soft, "laplacian_var") < _feature(sharp, "laplacian_var")

    def test_projection_shapes(self):
        weights, bias = analytic_projection("technical")
        assert weights.shape == (10, ANALYTIC_DIM)
        assert bias.shape == (10,)

    def test_unknown_role(self):
        with pytest.raises(ValueError):
            AnalyticExtractor("semantic")


class TestLoadExtractors:
    def test_analytic_pair(self):
        aesthetic, technical = load_extractors("analytic")
        assert (aesthetic.role, technical.role) == ("aesthetic", "technical")
        assert extractor_identity(aesthetic, technical) == "analytic-aesthetic+analytic-technical"

    @pytest.mark.parametrize("spec", ["resnet", "onnx:", "onnx:a.onnx", "onnx:a,b,c"])
    def test_malformed_spec(self, spec):
        with pytest.raises(ValueError):
            load_extractors(spec)

    def test_onnx_unavailable(self, monkeypatch):
        monkeypatch.setattr(extractors, "ONNX_AVAILABLE", False)
        with pytest.raises(ExtractorUnavailableError, match="onnxruntime"):
            OnnxExtractor("model.onnx", "aesthetic")

    def test_onnx_missing_model_file(self, temp_dir):
        pytest.importorskip("onnxruntime")
        with pytest.raises(ExtractorUnavailableError):
            OnnxExtractor(temp_dir / "missing.onnx", "aesthetic")

    def test_model_path_env(self, temp_dir, monkeypatch):
        monkeypatch.setenv("UGCRANK_MODEL_PATH", str(temp_dir))
        assert resolve_model_path("backbone.onnx") == temp_dir / "backbone.onnx"
        assert resolve_model_path(temp_dir / "x.onnx") == temp_dir / "x.onnx"


class TestContract:
    def test_analytic_passes(self):
        check_extractor_contract(AnalyticExtractor("aesthetic"))

    def test_nondeterministic_extractor_fails(self):
        with pytest.raises(ContractViolationError, match="differ"):
            check_extractor_contract(FlakyExtractor())

    def test_wrong_length_fails(self):
        with pytest.raises(ContractViolationError, match="declared 4"):
            check_extractor_contract(ShortExtractor())
