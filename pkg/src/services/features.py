"""Feature vectors, normalization and the on-disk feature store."""

import hashlib
import logging
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from src.models import (
    ContractViolationError,
    DimensionMismatchError,
    FeatureStoreError,
    FeatureVector,
    NormalizerStats,
    OutputWriteError,
    RankerError,
    RgbImage,
    ScoreDistribution,
)
from src.models.features import N_SCORE_BINS, SCORE_VALUES, feature_dim
from src.services.extractors import FeatureExtractor
from src.services.loader import load_image, rescale
from src.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-8

STORE_MAGIC = b"UGCF"
STORE_VERSION = 1


def extract(
    img_path: str | Path, aesthetic: FeatureExtractor, technical: FeatureExtractor
) -> FeatureVector:
    """Decode an image file and build its feature vector.

    Raises:
        ImageNotFoundError: If the file doesn't exist.
        ImageDecodeError: If the file cannot be decoded.
        ContractViolationError: If an extractor returns the wrong number of values.
    """
    return extract_image(load_image(img_path), aesthetic, technical)


def extract_image(
    img: RgbImage, aesthetic: FeatureExtractor, technical: FeatureExtractor
) -> FeatureVector:
    """Feature vector of an in-memory image.

    Geometry is taken from ``img`` before it is rescaled to the model input
    size. Layout: [A emb | A dist | T emb | T dist | height | width | w/h].
    """
    if aesthetic.embed_dim != technical.embed_dim:
        raise ContractViolationError(
            f"{aesthetic.name}+{technical.name}",
            f"embedding widths differ ({aesthetic.embed_dim} vs {technical.embed_dim})",
        )

    height, width = img.height, img.width
    model_input = rescale(img)

    parts = []
    for extractor in (aesthetic, technical):
        embedding, dist = extractor.run(model_input)
        embedding = np.asarray(embedding, dtype=np.float64).reshape(-1)
        if embedding.size != extractor.embed_dim:
            raise ContractViolationError(
                extractor.name,
                f"embedding has {embedding.size} values, declared {extractor.embed_dim}",
            )
        if dist.probs.size != N_SCORE_BINS:
            raise ContractViolationError(extractor.name, f"distribution has {dist.probs.size} bins")
        parts.extend([embedding, dist.probs])

    parts.append(np.array([height, width, width / height], dtype=np.float64))
    return FeatureVector(values=np.concatenate(parts), embed_dim=aesthetic.embed_dim)


def expected_score(dist: ScoreDistribution | Sequence[float]) -> float:
    """Mean of the score distribution, in [1, 10].

    Raises:
        ValueError: If ``dist`` is not a valid distribution.
    """
    if not isinstance(dist, ScoreDistribution):
        dist = ScoreDistribution(np.asarray(dist, dtype=np.float64))
    return float(SCORE_VALUES @ dist.probs)


def _as_matrix(vectors: Sequence[FeatureVector | np.ndarray]) -> np.ndarray:
    rows = [np.asarray(v.values if isinstance(v, FeatureVector) else v, dtype=np.float64) for v in vectors]
    if not rows:
        return np.empty((0, 0))
    dim = rows[0].shape[-1]
    for row in rows:
        if row.ndim != 1 or row.shape[0] != dim:
            raise DimensionMismatchError(dim, row.shape[-1])
    return np.stack(rows)


def fit_normalizer(vectors: Sequence[FeatureVector | np.ndarray]) -> NormalizerStats:
    """Per-coordinate mean and (population) standard deviation.

    Coordinates with std below 1e-8 get std 1e-8, so they normalize to 0.

    Raises:
        ValueError: If fewer than two vectors are given.
        DimensionMismatchError: If the vectors differ in length.
    """
    if len(vectors) < 2:
        raise ValueError("fit_normalizer needs at least 2 vectors")
    matrix = _as_matrix(vectors)
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    std = np.where(std < STD_FLOOR, STD_FLOOR, std)
    return NormalizerStats(mean=mean, std=std)


def apply_normalizer(v: FeatureVector | np.ndarray, stats: NormalizerStats) -> np.ndarray:
    """Z-score one vector, or each row of a matrix.

    Raises:
        DimensionMismatchError: If the vector length differs from the stats.
    """
    x = np.asarray(v.values if isinstance(v, FeatureVector) else v, dtype=np.float64)
    if x.shape[-1] != stats.dim:
        raise DimensionMismatchError(stats.dim, x.shape[-1])
    return (x - stats.mean) / stats.std


def key_hash(key: str) -> int:
    """8-byte BLAKE2b hash of an image key."""
    return int.from_bytes(hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest(), "little")


def _record_dtype(dim: int) -> np.dtype:
    return np.dtype([("key", "<u8"), ("values", "<f4", (dim,))])


@dataclass
class FeatureStore:
    """Feature vectors of many images, looked up by image key.

    Keys are record ids, or content addresses for distorted negatives. Values
    are stored as float32.

    Attributes:
        extractor_names: (aesthetic, technical) extractor names.
        embed_dim: Per-backbone embedding width B.
        hashes: Key hashes, one per row.
        values: (N, D) float32 matrix.
    """

    extractor_names: tuple[str, str]
    embed_dim: int
    hashes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    source: str = ""
    _index: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != self.hashes.shape[0]:
            raise ValueError("one value row per key hash required")
        if self.values.shape[1] != feature_dim(self.embed_dim):
            raise DimensionMismatchError(feature_dim(self.embed_dim), self.values.shape[1])
        self._index = {int(h): i for i, h in enumerate(self.hashes)}

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def extractor(self) -> str:
        return "+".join(self.extractor_names)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __contains__(self, key: str) -> bool:
        return key_hash(key) in self._index

    def get(self, key: str) -> np.ndarray:
        """Feature vector of ``key`` as float64.

        Raises:
            FeatureStoreError: If the key is missing.
        """
        row = self._index.get(key_hash(key))
        if row is None:
            raise FeatureStoreError(self.source or "<memory>", f"no features for key '{key}'")
        return self.values[row].astype(np.float64)

    def matrix(self, keys: Sequence[str]) -> np.ndarray:
        """Stacked (len(keys), D) float64 features."""
        if not keys:
            return np.empty((0, self.dim))
        return np.stack([self.get(key) for key in keys])

    @classmethod
    def from_vectors(
        cls,
        extractor_names: tuple[str, str],
        embed_dim: int,
        vectors: Mapping[str, FeatureVector | np.ndarray],
    ) -> "FeatureStore":
        keys = list(vectors)
        dim = feature_dim(embed_dim)
        values = np.zeros((len(keys), dim), dtype=np.float32)
        for i, key in enumerate(keys):
            v = vectors[key]
            values[i] = np.asarray(v.values if isinstance(v, FeatureVector) else v)
        hashes = np.array([key_hash(k) for k in keys], dtype=np.uint64)
        return cls(extractor_names=extractor_names, embed_dim=embed_dim, hashes=hashes, values=values)


def save_feature_store(store: FeatureStore, path: str | Path) -> Path:
    """Write a store atomically (temp file + rename).

    Raises:
        OutputWriteError: If the file cannot be written.
    """
    path = Path(path)
    header = bytearray(STORE_MAGIC)
    header += struct.pack("<H", STORE_VERSION)
    for name in store.extractor_names:
        encoded = name.encode("utf-8")
        header += struct.pack("<H", len(encoded)) + encoded
    header += struct.pack("<IIQ", store.dim, store.embed_dim, len(store))

    records = np.zeros(len(store), dtype=_record_dtype(store.dim))
    records["key"] = store.hashes
    records["values"] = store.values

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(bytes(header))
                handle.write(records.tobytes())
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
    except OSError as e:
        raise OutputWriteError(str(path), str(e))

    logger.debug("Wrote %d feature vectors (D=%d) to %s", len(store), store.dim, path)
    return path


def load_feature_store(path: str | Path) -> FeatureStore:
    """Read a store written by :func:`save_feature_store`.

    Raises:
        FeatureStoreError: On bad magic, unknown version or truncation.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise FeatureStoreError(str(path), str(e))

    offset = 0

    def take(n: int) -> bytes:
        nonlocal offset
        if offset + n > len(data):
            raise FeatureStoreError(str(path), "file is truncated")
        chunk = data[offset : offset + n]
        offset += n
        return chunk

    if take(4) != STORE_MAGIC:
        raise FeatureStoreError(str(path), "bad magic (not a feature store)")
    (version,) = struct.unpack("<H", take(2))
    if version != STORE_VERSION:
        raise FeatureStoreError(str(path), f"unsupported version {version}")

    names = []
    for _ in range(2):
        (length,) = struct.unpack("<H", take(2))
        try:
            names.append(take(length).decode("utf-8"))
        except UnicodeDecodeError:
            raise FeatureStoreError(str(path), "extractor name is not UTF-8")
    dim, embed_dim, count = struct.unpack("<IIQ", take(16))
    if dim != feature_dim(embed_dim):
        raise FeatureStoreError(str(path), f"D={dim} inconsistent with B={embed_dim}")

    dtype = _record_dtype(dim)
    body = take(dtype.itemsize * count)
    if offset != len(data):
        raise FeatureStoreError(str(path), f"{len(data) - offset} trailing bytes")
    records = np.frombuffer(body, dtype=dtype, count=count)

    return FeatureStore(
        extractor_names=(names[0], names[1]),
        embed_dim=embed_dim,
        hashes=records["key"].astype(np.uint64),
        values=records["values"].astype(np.float32),
        source=str(path),
    )


def build_feature_store(
    items: Mapping[str, str | Path],
    aesthetic: FeatureExtractor,
    technical: FeatureExtractor,
    threads: Optional[int] = None,
    show_progress: bool = False,
) -> tuple[FeatureStore, list[tuple[str, str]]]:
    """Extract features for every (key -> image path) item.

    Images are processed in parallel; rows keep the order of ``items``.
    Images that fail to decode are skipped and reported.

    Returns:
        (store, [(key, error message), ...]).
    """
    keys = list(items)

    def work(key: str) -> tuple[Optional[FeatureVector], Optional[str]]:
        try:
            return extract(items[key], aesthetic, technical), None
        except ContractViolationError:
            raise
        except RankerError as e:
            logger.warning("Skipping %s: %s", key, e.message)
            return None, e.message

    outcomes = parallel_map(work, keys, threads, desc="extract", show_progress=show_progress)

    vectors: dict[str, FeatureVector] = {}
    errors: list[tuple[str, str]] = []
    for key, (vector, error) in zip(keys, outcomes):
        if vector is None:
            errors.append((key, error or "unknown error"))
        else:
            vectors[key] = vector

    store = FeatureStore.from_vectors(
        (aesthetic.name, technical.name), aesthetic.embed_dim, vectors
    )
    logger.info("Extracted %d feature vectors (%d failed)", len(store), len(errors))
    return store, errors
