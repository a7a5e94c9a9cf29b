"""Image file loading and validation service."""

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from src.models import DegenerateImageError, ImageDecodeError, ImageNotFoundError, RgbImage

MODEL_INPUT_SIZE = 224


def validate_image_file(path: str | Path) -> tuple[int, int]:
    """Check that a file decodes as an image without loading its pixels.

    Args:
        path: Path to the image file.

    Returns:
        (height, width) in pixels.

    Raises:
        ImageNotFoundError: If the file doesn't exist.
        ImageDecodeError: If the file is not a decodable image.
    """
    path = Path(path)
    if not path.exists():
        raise ImageNotFoundError(str(path))

    try:
        with Image.open(path) as img:
            width, height = img.size
    except (UnidentifiedImageError, OSError) as e:
        raise ImageDecodeError(str(path), str(e))

    if width < 1 or height < 1:
        raise DegenerateImageError(f"{path} has size {width}x{height}")
    return height, width


def load_uint8(path: str | Path) -> np.ndarray:
    """Decode a file to an 8-bit (height, width, 3) RGB array.

    Raises:
        ImageNotFoundError: If the file doesn't exist.
        ImageDecodeError: If decoding fails.
    """
    path = Path(path)
    if not path.exists():
        raise ImageNotFoundError(str(path))

    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise ImageDecodeError(str(path), str(e))
    except MemoryError:
        raise ImageDecodeError(str(path), "image too large to load into memory")


def load_image(path: str | Path) -> RgbImage:
    """Load an image file as an RgbImage with values in [0, 1]."""
    path = Path(path)
    return RgbImage.from_uint8(load_uint8(path), path=path)


def rescale(img: RgbImage, size: int = MODEL_INPUT_SIZE) -> RgbImage:
    """Bilinear rescale to ``size`` x ``size``.

    Resampling runs per channel on 32-bit float planes so no 8-bit
    quantization is introduced.
    """
    if img.height == size and img.width == size:
        return RgbImage(pixels=img.pixels.copy(), path=img.path)

    channels = []
    for c in range(3):
        plane = Image.fromarray(img.pixels[:, :, c].astype(np.float32))
        plane = plane.resize((size, size), resample=Image.Resampling.BILINEAR)
        channels.append(np.asarray(plane, dtype=np.float64))
    pixels = np.clip(np.stack(channels, axis=-1), 0.0, 1.0)
    return RgbImage(pixels=pixels, path=img.path)
