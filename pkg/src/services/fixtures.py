"""Procedurally generated image corpus for tests and offline demos.

Every style gets one studio image, two good UGC images and one bad UGC image.
Clean images are warm-palette composites (gradient background, sharp shapes,
fine texture); bad UGC images are clean images degraded by blur, flattening
and sensor noise. Everything is a pure function of the seed.
"""

import logging
from pathlib import Path

import numpy as np

from src.models import (
    Bucket,
    DistortionKind,
    DistortionSpec,
    ImageRecord,
    Manifest,
    RgbImage,
    Split,
)
from src.services.corpus import save_manifest
from src.services.distortion import apply_distortion, hsv_to_rgb
from src.services.exporter import save_image
from src.utils.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
IMAGE_DIR = "images"

DEFAULT_STYLES = 16
MIN_SIDE = 56
MAX_SIDE = 72

# (train, val) style counts; the rest are test
SPLIT_SIZES = (10, 3)


def clean_image(seed: int, height: int, width: int) -> RgbImage:
    """A sharp, colourful composite."""
    rng = make_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    y = yy / max(height - 1, 1)
    x = xx / max(width - 1, 1)

    base_hue = rng.uniform(0.0, 0.12)
    hsv = np.empty((height, width, 3))
    hsv[..., 0] = np.mod(base_hue + 0.04 * x, 1.0)
    hsv[..., 1] = 0.45 + 0.35 * y
    hsv[..., 2] = 0.35 + 0.45 * x

    for _ in range(int(rng.integers(3, 6))):
        cy, cx = rng.uniform(0.15, 0.85, size=2)
        ry, rx = rng.uniform(0.08, 0.25, size=2)
        if rng.integers(0, 2) == 0:
            mask = ((y - cy) / ry) ** 2 + ((x - cx) / rx) ** 2 <= 1.0
        else:
            mask = (np.abs(y - cy) <= ry) & (np.abs(x - cx) <= rx)
        hsv[mask, 0] = np.mod(base_hue + rng.uniform(-0.05, 0.1), 1.0)
        hsv[mask, 1] = rng.uniform(0.55, 1.0)
        hsv[mask, 2] = rng.uniform(0.55, 1.0)

    # fine stripes keep edges and high frequencies in every image
    period = int(rng.integers(3, 6))
    stripes = ((xx + yy) // period) % 2 == 0
    hsv[..., 2] = np.clip(hsv[..., 2] * np.where(stripes, 1.0, 0.85), 0.0, 1.0)
    return RgbImage(pixels=np.clip(hsv_to_rgb(hsv), 0.0, 1.0))


def degrade(img: RgbImage, seed: int) -> RgbImage:
    """Blur, flatten and add noise, the way a poor phone photo looks."""
    rng = make_rng(seed)
    chain = [
        DistortionSpec(DistortionKind.GAUSSIAN_BLUR, param=float(rng.uniform(1.2, 1.8))),
        DistortionSpec(DistortionKind.JITTER_CONTRAST, param=float(rng.uniform(0.5, 0.7))),
        DistortionSpec(DistortionKind.GAUSSIAN_NOISE, param=float(rng.uniform(0.04, 0.08)), seed=seed),
    ]
    for spec in chain:
        img = apply_distortion(img, spec, validate=False)
    return img


def _split_of(style_index: int) -> Split:
    n_train, n_val = SPLIT_SIZES
    if style_index < n_train:
        return Split.TRAIN
    if style_index < n_train + n_val:
        return Split.VAL
    return Split.TEST


def make_fixture_corpus(
    out_dir: str | Path, seed: int = 0, n_styles: int = DEFAULT_STYLES
) -> Manifest:
    """Write images and ``manifest.jsonl`` under ``out_dir``.

    Record paths are relative to ``out_dir``. Proxy scores are distinct
    within every style, and ``has_human`` alternates so every pair class has
    eligible images.

    Returns:
        The written manifest.
    """
    if n_styles < 1:
        raise ValueError("n_styles must be >= 1")
    out_dir = Path(out_dir)
    (out_dir / IMAGE_DIR).mkdir(parents=True, exist_ok=True)

    records = []
    for s in range(n_styles):
        style_id = f"style{s:02d}"
        split = _split_of(s)
        members = [
            (Bucket.STUDIO, 40, 2),
            (Bucket.UGC_GOOD, 24, 3),
            (Bucket.UGC_GOOD, 18, 4),
            (Bucket.UGC_BAD, 3, 16),
        ]
        for k, (bucket, upvotes, downvotes) in enumerate(members):
            record_id = f"{style_id}_{k}"
            image_seed = derive_seed(seed, record_id)
            rng = make_rng(image_seed)
            height, width = (int(v) for v in rng.integers(MIN_SIDE, MAX_SIDE + 1, size=2))

            img = clean_image(image_seed, height, width)
            if bucket is Bucket.UGC_BAD:
                img = degrade(img, derive_seed(image_seed, "degrade"))

            rel_path = f"{IMAGE_DIR}/{record_id}.png"
            save_image(img, out_dir / rel_path)
            records.append(
                ImageRecord(
                    id=record_id,
                    path=rel_path,
                    bucket=bucket,
                    style_id=style_id,
                    upvotes=upvotes + s % 3,
                    downvotes=downvotes,
                    split=split,
                    has_human=(s + k) % 2 == 0,
                )
            )

    manifest = Manifest(records=tuple(records), source_uri=str(out_dir / MANIFEST_NAME))
    save_manifest(manifest, out_dir / MANIFEST_NAME)
    logger.info("Wrote %d fixture images for %d styles to %s", len(records), n_styles, out_dir)
    return manifest
