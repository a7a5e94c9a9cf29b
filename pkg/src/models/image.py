"""RgbImage data class for decoded images."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DegenerateImageError


@dataclass
class RgbImage:
    """A decoded RGB image with pixel values in [0, 1].

    Attributes:
        pixels: Array of shape (height, width, 3), float64, row-major.
        path: File the image was decoded from, if any.
    """

    pixels: np.ndarray = field(repr=False)
    path: Optional[Path] = None

    def __post_init__(self):
        """Validate shape and value range."""
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) pixels, got {self.pixels.shape}")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise DegenerateImageError(f"image has shape {self.pixels.shape[:2]}")
        if self.pixels.dtype != np.float64:
            self.pixels = self.pixels.astype(np.float64)

    @property
    def height(self) -> int:
        """Height in pixels."""
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        """Width in pixels."""
        return self.pixels.shape[1]

    @property
    def aspect_ratio(self) -> float:
        """Width divided by height."""
        return self.width / self.height

    def luminance(self) -> np.ndarray:
        """Rec.601 luma, shape (height, width)."""
        return luminance(self.pixels)

    def to_uint8(self) -> np.ndarray:
        """Quantize to 8-bit for lossless storage."""
        return np.clip(np.rint(self.pixels * 255.0), 0, 255).astype(np.uint8)

    @classmethod
    def from_uint8(cls, array: np.ndarray, path: Optional[Path] = None) -> "RgbImage":
        """Create an RgbImage from an 8-bit (height, width, 3) array."""
        return cls(pixels=array.astype(np.float64) / 255.0, path=path)

    @classmethod
    def constant(cls, height: int, width: int, value: float | tuple[float, float, float]) -> "RgbImage":
        """Create a flat image, handy for tests and probes."""
        pixels = np.empty((height, width, 3), dtype=np.float64)
        pixels[...] = value
        return cls(pixels=pixels)


REC601 = np.array([0.299, 0.587, 0.114])


def luminance(pixels: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an (..., 3) array."""
    return pixels @ REC601
