"""Pytest configuration and fixtures for image ranking tests."""

import logging
import tempfile
from pathlib import Path

import numpy as np
import pytest

from src.models import Bucket, ImageRecord, Manifest, RgbImage, Split
from src.services.corpus import save_manifest
from src.services.exporter import save_image
from src.services.fixtures import MANIFEST_NAME, clean_image, make_fixture_corpus


@pytest.fixture(autouse=True)
def reset_logging():
    """Undo CLI logging setup so caplog sees ``src`` records."""
    yield
    root = logging.getLogger("src")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(logging.NOTSET)
    root.propagate = True


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(1234)


@pytest.fixture
def gray_image():
    """Constant mid-gray 32x48 image."""
    return RgbImage.constant(32, 48, 0.5)


@pytest.fixture
def color_image():
    """Sharp, colourful 48x64 composite."""
    return clean_image(7, 48, 64)


@pytest.fixture
def random_image(rng):
    """Uniform noise 40x30 image."""
    return RgbImage(pixels=rng.uniform(0.0, 1.0, size=(40, 30, 3)))


@pytest.fixture
def image_file(temp_dir, color_image):
    """PNG file holding ``color_image``."""
    return save_image(color_image, temp_dir / "color.png")


def make_record(
    record_id: str,
    bucket: Bucket = Bucket.UGC_GOOD,
    style_id: str = "s1",
    upvotes: int = 1,
    downvotes: int = 1,
    split: Split = Split.TRAIN,
    has_human: bool | None = None,
    path: str | None = None,
) -> ImageRecord:
    """Record with defaults for everything but the id."""
    return ImageRecord(
        id=record_id,
        path=path or f"{record_id}.png",
        bucket=bucket,
        style_id=style_id,
        upvotes=upvotes,
        downvotes=downvotes,
        split=split,
        has_human=has_human,
    )


@pytest.fixture
def full_manifest():
    """Training manifest in which every pair class has eligible images."""
    records = []
    for i in range(4):
        records.append(make_record(f"studio{i}", Bucket.STUDIO, has_human=i % 2 == 0))
        records.append(make_record(f"good{i}", Bucket.UGC_GOOD, has_human=i % 2 == 0))
        records.append(make_record(f"bad{i}", Bucket.UGC_BAD, has_human=i % 2 == 0))
    return Manifest(records=tuple(records))


@pytest.fixture
def image_corpus(temp_dir, full_manifest):
    """``full_manifest`` with its images written under ``temp_dir``."""
    for k, record in enumerate(full_manifest.records):
        save_image(clean_image(k, 24, 32), temp_dir / record.path)
    save_manifest(full_manifest, temp_dir / MANIFEST_NAME)
    return temp_dir, full_manifest


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    """Bundled procedural corpus, generated once per session."""
    root = tmp_path_factory.mktemp("fixture_corpus")
    manifest = make_fixture_corpus(root, seed=0)
    return root, manifest
