"""Tests for seeded image distortions."""

from collections import Counter

import numpy as np
import pytest
from scipy.stats import norm

from src.models import (
    DEFAULT_RANGES,
    DegenerateImageError,
    DistortionKind,
    DistortionSpec,
    RgbImage,
)
from src.services.distortion import (
    apply_distortion,
    distort_chain,
    hsv_to_rgb,
    rgb_to_hsv,
    sample_chain,
    sample_spec,
)

GRAYSCALE = DistortionSpec(DistortionKind.GRAYSCALE)


def _crop(kind: DistortionKind, f: float, seed: int = 3) -> DistortionSpec:
    return DistortionSpec(kind, param=f, seed=seed)


class TestSampleSpec:
    def test_deterministic(self):
        assert sample_spec(42) == sample_spec(42)
        assert sample_chain(42, chain_max=3) == sample_chain(42, chain_max=3)

    def test_kind_frequencies(self):
        specs = [sample_spec(seed) for seed in range(10_000)]
        counts = Counter(spec.kind for spec in specs)
        assert set(counts) == set(DistortionKind)
        for kind, count in counts.items():
            assert 0.05 <= count / len(specs) <= 0.14, kind

    def test_sampled_specs_are_valid(self):
        for seed in range(2_000):
            sample_spec(seed).validate()

    def test_jitter_uses_both_intervals(self):
        factors = [
            s.param for s in (sample_spec(seed) for seed in range(3_000)) if s.kind.is_jitter
        ]
        assert any(f < 1.0 for f in factors)
        assert any(f > 1.0 for f in factors)

    def test_chain_length_bounds(self):
        lengths = {len(sample_chain(seed, chain_max=3)) for seed in range(300)}
        assert lengths == {1, 2, 3}

    def test_chain_max_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_chain(1, chain_max=0)


class TestSpecValidation:
    @pytest.mark.parametrize(
        "spec",
        [
            DistortionSpec(DistortionKind.RANDOM_CROP, param=0.7),
            DistortionSpec(DistortionKind.JITTER_HUE, param=1.0),
            DistortionSpec(DistortionKind.GAUSSIAN_NOISE),
            DistortionSpec(DistortionKind.GRAYSCALE, param=0.5),
            DistortionSpec(DistortionKind.ROTATION, angle_degrees=7),
            DistortionSpec(DistortionKind.GAUSSIAN_BLUR, param=1.0, angle_degrees=5),
        ],
    )
    def test_invalid_specs_rejected(self, spec, color_image):
        with pytest.raises(ValueError):
            apply_distortion(color_image, spec)

    def test_to_dict_from_dict(self):
        spec = DistortionSpec(DistortionKind.ROTATION_MIXUP, param=0.3, angle_degrees=15, seed=2**63)
        assert DistortionSpec.from_dict(spec.to_dict()) == spec

    def test_ranges_from_dict_keeps_defaults(self):
        ranges = DEFAULT_RANGES.from_dict({"noise": [0.01, 0.05]})
        assert ranges.noise == (0.01, 0.05)
        assert ranges.blur == DEFAULT_RANGES.blur


class TestApplyDistortion:
    def test_every_kind_stays_in_range_and_is_deterministic(self, color_image):
        seen = set()
        for seed in range(200):
            spec = sample_spec(seed)
            seen.add(spec.kind)
            first = apply_distortion(color_image, spec)
            second = apply_distortion(color_image, spec)
            assert first.pixels.tobytes() == second.pixels.tobytes()
            assert first.pixels.min() >= 0.0 and first.pixels.max() <= 1.0
            if not spec.kind.is_crop:
                assert first.pixels.shape == color_image.pixels.shape
        assert seen == set(DistortionKind)

    def test_input_not_modified(self, color_image):
        before = color_image.pixels.copy()
        apply_distortion(color_image, DistortionSpec(DistortionKind.GAUSSIAN_NOISE, 0.5, seed=1))
        np.testing.assert_array_equal(color_image.pixels, before)

    def test_grayscale_equal_channels_and_idempotent(self, color_image):
        once = apply_distortion(color_image, GRAYSCALE)
        twice = apply_distortion(once, GRAYSCALE)
        np.testing.assert_array_equal(once.pixels[..., 0], once.pixels[..., 1])
        np.testing.assert_array_equal(once.pixels[..., 1], once.pixels[..., 2])
        np.testing.assert_array_equal(once.pixels, twice.pixels)

    def test_vertical_crop_dimensions(self):
        img = RgbImage.constant(224, 224, 0.3)
        out = apply_distortion(img, _crop(DistortionKind.VERTICAL_CROP, 0.5))
        assert (out.width, out.height) == (224, 112)

    def test_horizontal_crop_dimensions(self):
        img = RgbImage.constant(100, 80, 0.3)
        out = apply_distortion(img, _crop(DistortionKind.HORIZONTAL_CROP, 0.45))
        assert out.height == 100
        assert abs(out.width - 80 * 0.45) <= 1

    @pytest.mark.parametrize("f", [0.4, 0.5, 0.6])
    def test_random_crop_area_fraction(self, f):
        img = RgbImage.constant(90, 120, 0.3)
        out = apply_distortion(img, _crop(DistortionKind.RANDOM_CROP, f))
        side = np.sqrt(f)
        assert abs(out.height - 90 * side) <= 1
        assert abs(out.width - 120 * side) <= 1

    def test_crop_window_is_a_subregion(self, color_image):
        out = apply_distortion(color_image, _crop(DistortionKind.RANDOM_CROP, 0.5, seed=11))
        h, w = out.height, out.width
        found = any(
            np.array_equal(color_image.pixels[top : top + h, left : left + w], out.pixels)
            for top in range(color_image.height - h + 1)
            for left in range(color_image.width - w + 1)
        )
        assert found

    def test_degenerate_crop(self):
        img = RgbImage.constant(1, 1, 0.5)
        with pytest.raises(DegenerateImageError):
            apply_distortion(img, _crop(DistortionKind.VERTICAL_CROP, 0.4))

    def test_brightness_identity(self, color_image):
        spec = DistortionSpec(DistortionKind.JITTER_BRIGHTNESS, param=1.0)
        out = apply_distortion(color_image, spec, validate=False)
        np.testing.assert_array_equal(out.pixels, color_image.pixels)

    def test_brightness_scales(self):
        img = RgbImage.constant(4, 4, 0.5)
        spec = DistortionSpec(DistortionKind.JITTER_BRIGHTNESS, param=0.4)
        np.testing.assert_allclose(apply_distortion(img, spec).pixels, 0.2)

    @pytest.mark.parametrize("f", [0.3, 0.45, 0.6])
    def test_contrast_keeps_mean_luminance(self, rng, f):
        img = RgbImage(pixels=rng.uniform(0.3, 0.7, size=(20, 20, 3)))
        out = apply_distortion(img, DistortionSpec(DistortionKind.JITTER_CONTRAST, param=f))
        assert abs(out.luminance().mean() - img.luminance().mean()) < 1e-6

    def test_hue_shift_moves_hue(self):
        img = RgbImage.constant(2, 2, (0.8, 0.2, 0.2))
        out = apply_distortion(img, DistortionSpec(DistortionKind.JITTER_HUE, param=1.25))
        hue = rgb_to_hsv(out.pixels)[0, 0, 0]
        assert hue == pytest.approx(0.25, abs=1e-9)

    def test_hsv_round_trip(self, random_image):
        back = hsv_to_rgb(rgb_to_hsv(random_image.pixels))
        np.testing.assert_allclose(back, random_image.pixels, atol=1e-12)

    @pytest.mark.parametrize("c", [0.0, 0.37, 1.0])
    def test_blur_keeps_constant_images(self, c):
        img = RgbImage.constant(30, 20, c)
        out = apply_distortion(img, DistortionSpec(DistortionKind.GAUSSIAN_BLUR, param=1.2))
        np.testing.assert_allclose(out.pixels, c, rtol=0, atol=1e-12)

    def test_blur_smooths_edges(self, color_image):
        out = apply_distortion(color_image, DistortionSpec(DistortionKind.GAUSSIAN_BLUR, param=1.0))
        assert np.abs(np.diff(out.pixels, axis=1)).mean() < np.abs(
            np.diff(color_image.pixels, axis=1)
        ).mean()

    def test_noise_matches_clipped_gaussian_oracle(self):
        sigma = 0.5
        img = RgbImage.constant(224, 224, 0.5)
        out = apply_distortion(img, DistortionSpec(DistortionKind.GAUSSIAN_NOISE, sigma, seed=9))
        observed = np.abs(out.pixels - 0.5).mean()

        # E[min(|e|, c)] for e ~ N(0, sigma^2), clipped at c = 0.5
        c = 0.5
        expected = 2 * sigma * norm.pdf(0) * (1 - np.exp(-(c**2) / (2 * sigma**2)))
        expected += c * 2 * norm.sf(c / sigma)
        assert abs(observed - expected) / expected < 0.05

    def test_noise_depends_on_seed(self, gray_image):
        a = apply_distortion(gray_image, DistortionSpec(DistortionKind.GAUSSIAN_NOISE, 0.3, seed=1))
        b = apply_distortion(gray_image, DistortionSpec(DistortionKind.GAUSSIAN_NOISE, 0.3, seed=2))
        assert not np.array_equal(a.pixels, b.pixels)

    def test_rotation_fills_corners_black(self):
        img = RgbImage.constant(40, 40, 1.0)
        out = apply_distortion(img, DistortionSpec(DistortionKind.ROTATION, angle_degrees=20))
        assert out.pixels[0, 0].max() == 0.0
        assert out.pixels[20, 20].min() == pytest.approx(1.0)

    def test_mixup_blends_with_rotation(self, color_image):
        spec = DistortionSpec(DistortionKind.ROTATION_MIXUP, 0.3, angle_degrees=10, seed=5)
        rotated = apply_distortion(
            color_image, DistortionSpec(DistortionKind.ROTATION, angle_degrees=10, seed=5)
        )
        out = apply_distortion(color_image, spec)
        expected = np.clip(0.3 * color_image.pixels + 0.7 * rotated.pixels, 0.0, 1.0)
        np.testing.assert_allclose(out.pixels, expected, atol=1e-12)


class TestDistortChain:
    def test_single_spec_matches_apply(self, color_image):
        spec = sample_spec(17)
        np.testing.assert_array_equal(
            distort_chain(color_image, [spec]).pixels, apply_distortion(color_image, spec).pixels
        )

    def test_grayscale_twice_equals_once(self, color_image):
        np.testing.assert_array_equal(
            distort_chain(color_image, [GRAYSCALE, GRAYSCALE]).pixels,
            distort_chain(color_image, [GRAYSCALE]).pixels,
        )

    def test_deterministic(self, color_image):
        chain = sample_chain(99)
        a = distort_chain(color_image, chain)
        b = distort_chain(color_image, chain)
        assert a.pixels.tobytes() == b.pixels.tobytes()

    @pytest.mark.parametrize("length", [0, 3])
    def test_length_outside_bounds(self, color_image, length):
        with pytest.raises(ValueError):
            distort_chain(color_image, [GRAYSCALE] * length, chain_max=2)
