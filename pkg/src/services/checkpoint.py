"""Binary checkpoint format for ranker models.

Layout (little-endian):

    magic "RNKR" | u16 version | u16 name length | name (UTF-8) | u32 D |
    u16 layer count | u32 width per layer | f32[D] mean | f32[D] std |
    per layer: f32 weights (row-major, fan_in x fan_out), f32 biases
"""

import logging
import os
import struct
import tempfile
import warnings
from pathlib import Path
from typing import Optional

import numpy as np

from src.models import (
    CheckpointError,
    DenseLayer,
    ExtractorMismatchWarning,
    NormalizerStats,
    OutputWriteError,
    RankerError,
    RankerModel,
)

logger = logging.getLogger(__name__)

MAGIC = b"RNKR"
VERSION = 1


def save_checkpoint(model: RankerModel, path: str | Path) -> Path:
    """Write ``model`` atomically.

    Parameters are stored as float32, so only a float32-exact model (see
    :meth:`RankerModel.float32_exact`) can be saved; it reloads to identical
    scores.

    Raises:
        RankerError: If a parameter would change when narrowed to float32.
        OutputWriteError: If the file cannot be written.
    """
    path = Path(path)
    inexact = _inexact_parameters(model)
    if inexact:
        raise RankerError(
            "model parameters are not float32-exact (" + ", ".join(inexact) + "); "
            "save model.float32_exact() instead"
        )
    name = model.extractor.encode("utf-8")
    if len(name) > 0xFFFF:
        raise ValueError("extractor name too long")

    chunks = [
        MAGIC,
        struct.pack("<H", VERSION),
        struct.pack("<H", len(name)),
        name,
        struct.pack("<I", model.input_dim),
        struct.pack("<H", len(model.layers)),
        struct.pack(f"<{len(model.layers)}I", *[layer.fan_out for layer in model.layers]),
        model.normalizer.mean.astype("<f4").tobytes(),
        model.normalizer.std.astype("<f4").tobytes(),
    ]
    for layer in model.layers:
        chunks.append(np.ascontiguousarray(layer.weight, dtype="<f4").tobytes())
        chunks.append(layer.bias.astype("<f4").tobytes())

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                for chunk in chunks:
                    handle.write(chunk)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
    except OSError as e:
        raise OutputWriteError(str(path), str(e))

    logger.debug("Saved checkpoint %s (%d parameters)", path, model.n_parameters)
    return path


def _inexact_parameters(model: RankerModel) -> list[str]:
    arrays = {"normalizer mean": model.normalizer.mean, "normalizer std": model.normalizer.std}
    for i, layer in enumerate(model.layers, start=1):
        arrays[f"layer {i} weights"] = layer.weight
        arrays[f"layer {i} biases"] = layer.bias
    return [
        name
        for name, values in arrays.items()
        if not np.array_equal(values, values.astype(np.float32).astype(np.float64), equal_nan=True)
    ]


class _Reader:
    """Bounds-checked cursor over checkpoint bytes."""

    def __init__(self, data: bytes, path: str):
        self.data = data
        self.path = path
        self.offset = 0

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            raise CheckpointError(self.path, f"file is truncated (reading {what})")
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def floats(self, count: int, what: str) -> np.ndarray:
        raw = self.take(4 * count, what)
        return np.frombuffer(raw, dtype="<f4").astype(np.float64)


def load_checkpoint(path: str | Path, expected_extractor: Optional[str] = None) -> RankerModel:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Args:
        path: Checkpoint file.
        expected_extractor: Identity of the extractors in use; a different
            stored identity raises an ExtractorMismatchWarning.

    Raises:
        CheckpointError: On missing files, bad magic, unknown version,
            truncation, trailing bytes or inconsistent dimensions.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(str(path), str(e))

    reader = _Reader(data, str(path))
    if reader.take(4, "magic") != MAGIC:
        raise CheckpointError(str(path), "bad magic (not a ranker checkpoint)")
    (version,) = reader.unpack("<H", "version")
    if version != VERSION:
        raise CheckpointError(str(path), f"unsupported version {version} (expected {VERSION})")

    (name_length,) = reader.unpack("<H", "extractor name")
    try:
        extractor = reader.take(name_length, "extractor name").decode("utf-8")
    except UnicodeDecodeError:
        raise CheckpointError(str(path), "extractor name is not UTF-8")

    (input_dim,) = reader.unpack("<I", "input dimension")
    (n_layers,) = reader.unpack("<H", "layer count")
    if input_dim < 1 or n_layers < 1:
        raise CheckpointError(str(path), f"invalid shape D={input_dim}, layers={n_layers}")
    widths = reader.unpack(f"<{n_layers}I", "layer widths")
    if widths[-1] != 1 or min(widths) < 1:
        raise CheckpointError(str(path), f"invalid layer widths {list(widths)}")

    mean = reader.floats(input_dim, "normalizer mean")
    std = reader.floats(input_dim, "normalizer std")

    layers = []
    fan_in = input_dim
    for i, fan_out in enumerate(widths, start=1):
        weight = reader.floats(fan_in * fan_out, f"layer {i} weights").reshape(fan_in, fan_out)
        bias = reader.floats(fan_out, f"layer {i} biases")
        layers.append(DenseLayer(weight=weight, bias=bias))
        fan_in = fan_out

    if reader.offset != len(data):
        raise CheckpointError(str(path), f"{len(data) - reader.offset} trailing bytes")

    model = RankerModel(layers=layers, normalizer=NormalizerStats(mean, std), extractor=extractor)
    if not model.is_finite():
        raise CheckpointError(str(path), "non-finite parameters")

    if expected_extractor is not None and extractor != expected_extractor:
        message = (
            f"checkpoint {path} was trained with extractor '{extractor}', "
            f"scoring with '{expected_extractor}'"
        )
        logger.warning(message)
        warnings.warn(message, ExtractorMismatchWarning, stacklevel=2)
    return model
