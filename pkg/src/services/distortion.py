"""Seeded, replayable image distortions that degrade quality.

Every manipulation is a pure function of (image, spec): all randomness comes
from a Philox generator keyed by ``spec.seed``.
"""

import logging
import math
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from src.models import (
    DEFAULT_RANGES,
    ROTATION_ANGLES,
    DegenerateImageError,
    DistortionKind,
    DistortionRanges,
    DistortionSpec,
    RgbImage,
)
from src.models.image import luminance
from src.utils.rng import draw_seed, make_rng

logger = logging.getLogger(__name__)

DEFAULT_CHAIN_MAX = 2

KINDS = tuple(DistortionKind)


def sample_spec(rng_seed: int, ranges: DistortionRanges = DEFAULT_RANGES) -> DistortionSpec:
    """Draw a random distortion spec.

    Kind is uniform over all kinds, the parameter uniform within the kind's
    range (jitter kinds first pick one of their two intervals with probability
    1/2), the rotation angle uniform over the allowed angles.

    Args:
        rng_seed: 64-bit seed; the same seed always yields the same spec.
        ranges: Parameter ranges to sample from.

    Returns:
        A valid DistortionSpec.
    """
    rng = make_rng(rng_seed)
    kind = KINDS[int(rng.integers(len(KINDS)))]

    param = None
    intervals = ranges.intervals(kind)
    if intervals:
        lo, hi = intervals[int(rng.integers(len(intervals)))]
        param = float(rng.uniform(lo, hi))

    angle = None
    if kind.is_rotation:
        angle = ROTATION_ANGLES[int(rng.integers(len(ROTATION_ANGLES)))]

    return DistortionSpec(kind=kind, param=param, angle_degrees=angle, seed=draw_seed(rng))


def sample_chain(
    rng_seed: int,
    chain_max: int = DEFAULT_CHAIN_MAX,
    ranges: DistortionRanges = DEFAULT_RANGES,
) -> tuple[DistortionSpec, ...]:
    """Draw a chain of 1..chain_max specs (length uniform)."""
    if chain_max < 1:
        raise ValueError("chain_max must be >= 1")
    rng = make_rng(rng_seed)
    length = int(rng.integers(1, chain_max + 1))
    return tuple(sample_spec(draw_seed(rng), ranges) for _ in range(length))


def apply_distortion(img: RgbImage, spec: DistortionSpec, validate: bool = True) -> RgbImage:
    """Apply one manipulation.

    Args:
        img: Input image (not modified).
        spec: Manipulation to apply.
        validate: Check ``spec`` against the default parameter ranges first.

    Returns:
        New image with values in [0, 1]; same size unless ``spec`` is a crop.

    Raises:
        ValueError: If ``validate`` and the spec is outside its legal range.
        DegenerateImageError: If the crop window would be smaller than 1x1.
    """
    if validate:
        spec.validate()
    if img.height < 1 or img.width < 1:
        raise DegenerateImageError(f"image has shape {img.pixels.shape[:2]}")

    rng = make_rng(spec.seed)
    pixels = _TRANSFORMS[spec.kind](img.pixels, spec, rng)
    return RgbImage(pixels=pixels, path=img.path)


def distort_chain(
    img: RgbImage,
    specs: Sequence[DistortionSpec],
    chain_max: int = DEFAULT_CHAIN_MAX,
    validate: bool = True,
) -> RgbImage:
    """Apply a chain of manipulations left to right.

    Raises:
        ValueError: If the chain is empty or longer than ``chain_max``.
    """
    if not 1 <= len(specs) <= chain_max:
        raise ValueError(f"chain length must be in 1..{chain_max}, got {len(specs)}")
    for spec in specs:
        img = apply_distortion(img, spec, validate=validate)
    return img


def _crop(pixels: np.ndarray, spec: DistortionSpec, rng: np.random.Generator) -> np.ndarray:
    """Keep a window; ``param`` is the retained area (random) or axis (vertical/horizontal) fraction."""
    h, w = pixels.shape[:2]
    f = spec.param
    if spec.kind is DistortionKind.RANDOM_CROP:
        side = math.sqrt(f)
        new_h, new_w = int(round(h * side)), int(round(w * side))
    elif spec.kind is DistortionKind.VERTICAL_CROP:
        new_h, new_w = int(round(h * f)), w
    else:
        new_h, new_w = h, int(round(w * f))

    if new_h < 1 or new_w < 1:
        raise DegenerateImageError(
            f"{spec.kind.value} of {h}x{w} with f={f} leaves a {new_h}x{new_w} window"
        )

    top = int(rng.integers(0, h - new_h + 1))
    left = int(rng.integers(0, w - new_w + 1))
    return pixels[top : top + new_h, left : left + new_w].copy()


def _brightness(pixels: np.ndarray, spec: DistortionSpec, rng: np.random.Generator) -> np.ndarray:
    return np.clip(spec.param * pixels, 0.0, 1.0)


def _contrast(pixels: np.ndarray, spec: DistortionSpec, rng: np.random.Generator) -> np.ndarray:
    mu = float(luminance(pixels).mean())
    return np.clip(mu + spec.param * (pixels - mu), 0.0, 1.0)


def _hue(pixels: np.ndarray, spec: DistortionSpec, rng: np.random.Generator) -> np.ndarray:
    hsv = rgb_to_hsv(pixels)
    hsv[..., 0] = np.mod(hsv[..., 0] + (spec.param - 1.0), 1.0)
    return np.clip(hsv_to_rgb(hsv), 0.0, 1.0)


def _blur(pixels: np.ndarray, spec: DistortionSpec, rng: np.random.Generator) -> np.ndarray:
    sigma = spec.param
    radius = math.ceil(3.0 * sigma)
    out = ndimage.gaussian_filter(
        pixels, sigma=sigma, radius=radius, mode="nearest", axes=(0, 1)
    )
    return np.clip(out, 0.0, 1.0)


def _noise(pixels: np.ndarray, spec: DistortionSpec, rng: np.random.Generator) -> np.ndarray:
    return np.clip(pixels + rng.normal(0.0, spec.param, size=pixels.shape), 0.0, 1.0)


def _grayscale(pixels: np.ndarray, spec: DistortionSpec, rng: np.random.Generator) -> np.ndarray:
    y = luminance(pixels)
    # the luma of a neutral pixel is its value; keep it exact so grayscale is idempotent
    neutral = (pixels[..., 0] == pixels[..., 1]) & (pixels[..., 1] == pixels[..., 2])
    y = np.where(neutral, pixels[..., 0], np.clip(y, 0.0, 1.0))
    return np.repeat(y[..., np.newaxis], 3, axis=2)


def _rotate(pixels: np.ndarray, angle: float) -> np.ndarray:
    out = ndimage.rotate(
        pixels,
        angle,
        axes=(1, 0),
        reshape=False,
        order=1,
        mode="constant",
        cval=0.0,
        prefilter=False,
    )
    return np.clip(out, 0.0, 1.0)


def _signed_angle(spec: DistortionSpec, rng: np.random.Generator) -> float:
    sign = 1.0 if rng.integers(0, 2) == 1 else -1.0
    return sign * float(spec.angle_degrees)


def _rotation(pixels: np.ndarray, spec: DistortionSpec, rng: np.random.Generator) -> np.ndarray:
    return _rotate(pixels, _signed_angle(spec, rng))


def _rotation_mixup(
    pixels: np.ndarray, spec: DistortionSpec, rng: np.random.Generator
) -> np.ndarray:
    """Ghost the image over its rotated copy (camera shake)."""
    rotated = _rotate(pixels, _signed_angle(spec, rng))
    f = spec.param
    return np.clip(f * pixels + (1.0 - f) * rotated, 0.0, 1.0)


_TRANSFORMS: dict[
    DistortionKind, Callable[[np.ndarray, DistortionSpec, np.random.Generator], np.ndarray]
] = {
    DistortionKind.RANDOM_CROP: _crop,
    DistortionKind.VERTICAL_CROP: _crop,
    DistortionKind.HORIZONTAL_CROP: _crop,
    DistortionKind.JITTER_BRIGHTNESS: _brightness,
    DistortionKind.JITTER_CONTRAST: _contrast,
    DistortionKind.JITTER_HUE: _hue,
    DistortionKind.GAUSSIAN_BLUR: _blur,
    DistortionKind.GAUSSIAN_NOISE: _noise,
    DistortionKind.GRAYSCALE: _grayscale,
    DistortionKind.ROTATION: _rotation,
    DistortionKind.ROTATION_MIXUP: _rotation_mixup,
}


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Convert (..., 3) RGB in [0, 1] to HSV with hue in [0, 1) turns."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    v = maxc
    s = np.divide(delta, maxc, out=np.zeros_like(maxc), where=maxc > 0)

    safe = np.where(delta > 0, delta, 1.0)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h = np.where(r == maxc, bc - gc, np.where(g == maxc, 2.0 + rc - bc, 4.0 + gc - rc))
    h = np.where(delta > 0, np.mod(h / 6.0, 1.0), 0.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_hsv`."""
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6

    conditions = [i == k for k in range(6)]
    r = np.select(conditions, [v, q, p, p, t, v])
    g = np.select(conditions, [t, v, v, q, p, p])
    b = np.select(conditions, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)
