"""Image exporting service: lossless, content-addressed, atomic writes."""

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image

from src.models import DistortionSpec, OutputWriteError, RgbImage

DISTORTED_SUFFIX = ".png"


def content_address(source_id: str, specs: Iterable[DistortionSpec]) -> str:
    """Stable key of a distorted image: hash of its source id and chain."""
    payload = json.dumps(
        {"source": source_id, "chain": [spec.to_dict() for spec in specs]},
        sort_keys=True,
        separators=(",", ":"),
    )
    return "d_" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:24]


def generate_output_path(out_dir: str | Path, key: str, suffix: str = DISTORTED_SUFFIX) -> Path:
    """Path of a content-addressed image under ``out_dir``."""
    return Path(out_dir) / f"{key}{suffix}"


def save_image(image: RgbImage | np.ndarray, output_path: str | Path) -> Path:
    """Save an image losslessly (PNG) via write-to-temp + atomic rename.

    Concurrent writers of the same content-addressed path are safe: each
    writes its own temporary file and the last rename wins with identical bytes.

    Args:
        image: RgbImage, or an 8-bit (height, width, 3) array.
        output_path: Destination path.

    Returns:
        The output path.

    Raises:
        OutputWriteError: If the file cannot be written.
    """
    output_path = Path(output_path)
    array = image.to_uint8() if isinstance(image, RgbImage) else image

    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(
            dir=output_path.parent, prefix=f".{output_path.stem}.", suffix=".tmp"
        )
    except OSError as e:
        raise OutputWriteError(str(output_path), str(e))

    try:
        with os.fdopen(fd, "wb") as handle:
            Image.fromarray(array).save(handle, format="PNG")
        os.replace(tmp, output_path)
    except PermissionError:
        Path(tmp).unlink(missing_ok=True)
        raise OutputWriteError(str(output_path), "permission denied")
    except OSError as e:
        Path(tmp).unlink(missing_ok=True)
        raise OutputWriteError(str(output_path), str(e))

    return output_path
