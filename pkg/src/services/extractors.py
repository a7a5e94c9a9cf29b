"""Feature extractors: built-in analytic statistics and ONNX backbone adapter."""

import logging
import os
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any

import numpy as np
from scipy import ndimage
from scipy.special import softmax

from src.models import (
    ContractViolationError,
    ExtractorUnavailableError,
    RgbImage,
    ScoreDistribution,
)
from src.models.features import N_SCORE_BINS
from src.services.distortion import rgb_to_hsv

# onnxruntime is optional - the analytic extractor needs no model files
try:
    import onnxruntime as ort

    ONNX_AVAILABLE = True
except ImportError:
    ort = None
    ONNX_AVAILABLE = False

logger = logging.getLogger(__name__)

ROLES = ("aesthetic", "technical")
MODEL_PATH_ENV = "UGCRANK_MODEL_PATH"

ANALYTIC_FEATURES = (
    "mean_r",
    "mean_g",
    "mean_b",
    "std_r",
    "std_g",
    "std_b",
    "mean_luma",
    "std_luma",
    "laplacian_var",
    "colorfulness",
    "edge_density",
    "luma_entropy",
    "mean_saturation",
    "std_saturation",
    "luma_p2",
    "luma_p98",
)
ANALYTIC_DIM = len(ANALYTIC_FEATURES)
EDGE_THRESHOLD = 0.1
HISTOGRAM_BINS = 32

# Score-head constants. Each head computes an evidence value
# z = q . (embedding - ANALYTIC_REFERENCE) and bin logits a_k * z - a_k^2 with
# a_k = (k - 4.5) / 4.5, i.e. ten fixed affine projections of the embedding.
ANALYTIC_REFERENCE = np.array(
    [0.5, 0.5, 0.5, 0.2, 0.2, 0.2, 0.5, 0.2, 0.01, 0.3, 0.1, 4.0, 0.4, 0.2, 0.05, 0.95]
)
ANALYTIC_EVIDENCE = {
    # tone, contrast and colour
    "aesthetic": np.array(
        [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 4.0, 0.0, 3.0, 0.0, 0.2, 2.0, 0.5, -2.0, 2.0]
    ),
    # sharpness, edges and histogram spread
    "technical": np.array(
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 2.0, 30.0, 0.0, 4.0, 0.3, 0.0, 0.0, -1.0, 1.0]
    ),
}
_BIN_SLOPES = (np.arange(N_SCORE_BINS) - 4.5) / 4.5


def analytic_projection(role: str) -> tuple[np.ndarray, np.ndarray]:
    """(weights (10, 16), bias (10,)) of a head's affine logit projections."""
    q = ANALYTIC_EVIDENCE[role]
    weights = np.outer(_BIN_SLOPES, q)
    bias = -_BIN_SLOPES * float(q @ ANALYTIC_REFERENCE) - _BIN_SLOPES**2
    return weights, bias


class FeatureExtractor(ABC):
    """One backbone role: an embedding head and a 10-bin score distribution head."""

    name: str
    embed_dim: int
    role: str

    @abstractmethod
    def run(self, img: RgbImage) -> tuple[np.ndarray, ScoreDistribution]:
        """Embed a model-input-sized image.

        Returns:
            (embedding of ``embed_dim`` reals, score distribution).
        """


class AnalyticExtractor(FeatureExtractor):
    """Dependency-free extractor built from global image statistics."""

    embed_dim = ANALYTIC_DIM

    def __init__(self, role: str = "aesthetic"):
        if role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {role}")
        self.role = role
        self.name = f"analytic-{role}"
        self._weights, self._bias = analytic_projection(role)

    def run(self, img: RgbImage) -> tuple[np.ndarray, ScoreDistribution]:
        embedding = analytic_embedding(img)
        logits = self._weights @ embedding + self._bias
        return embedding, ScoreDistribution(softmax(logits))

    def __repr__(self) -> str:
        return f"AnalyticExtractor(role={self.role!r})"


def analytic_embedding(img: RgbImage) -> np.ndarray:
    """The 16 statistics named in ANALYTIC_FEATURES."""
    pixels = img.pixels
    luma = img.luminance()

    channel_mean = pixels.mean(axis=(0, 1))
    channel_std = pixels.std(axis=(0, 1))

    sharpness = float(ndimage.laplace(luma, mode="nearest").var())

    grad_y, grad_x = np.gradient(luma)
    edge_density = float((np.hypot(grad_x, grad_y) > EDGE_THRESHOLD).mean())

    counts, _ = np.histogram(luma, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
    p = counts[counts > 0] / luma.size
    entropy = float(-(p * np.log2(p)).sum()) + 0.0

    saturation = rgb_to_hsv(pixels)[..., 1]
    p2, p98 = np.percentile(luma, [2, 98])

    return np.array(
        [
            *channel_mean,
            *channel_std,
            luma.mean(),
            luma.std(),
            sharpness,
            colorfulness(pixels),
            edge_density,
            entropy,
            saturation.mean(),
            saturation.std(),
            p2,
            p98,
        ],
        dtype=np.float64,
    )


def colorfulness(pixels: np.ndarray) -> float:
    """Hasler-Suesstrunk colourfulness on [0, 1] pixels."""
    r, g, b = pixels[..., 0], pixels[..., 1], pixels[..., 2]
    rg = r - g
    yb = 0.5 * (r + g) - b
    std_root = np.hypot(rg.std(), yb.std())
    mean_root = np.hypot(rg.mean(), yb.mean())
    return float(std_root + 0.3 * mean_root)


def analytic_extract(img: RgbImage, role: str = "aesthetic") -> tuple[np.ndarray, ScoreDistribution]:
    """Embedding and score distribution of the analytic extractor."""
    return AnalyticExtractor(role).run(img)


class OnnxExtractor(FeatureExtractor):
    """Adapter for a pretrained backbone exported to ONNX.

    The graph must take one image tensor (NHWC or NCHW, float32, values in
    [-1, 1]) and produce two outputs: a B-wide embedding and a 10-wide score
    distribution.
    """

    def __init__(self, model_path: str | Path, role: str):
        if not ONNX_AVAILABLE:
            raise ExtractorUnavailableError(
                str(model_path), "onnxruntime is not installed. Install with: pip install onnxruntime"
            )
        if role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {role}")

        self.model_path = resolve_model_path(model_path)
        self.role = role
        self.name = f"onnx-{role}:{self.model_path.name}"

        try:
            self._session = ort.InferenceSession(
                str(self.model_path), providers=["CPUExecutionProvider"]
            )
        except Exception as e:
            raise ExtractorUnavailableError(str(self.model_path), str(e))

        inputs = self._session.get_inputs()
        if len(inputs) != 1:
            raise ContractViolationError(self.name, f"expected 1 input, found {len(inputs)}")
        self._input_name = inputs[0].name
        self._channels_first = _is_channels_first(inputs[0].shape)

        outputs = self._session.get_outputs()
        widths = [_last_dim(o.shape) for o in outputs]
        if len(outputs) != 2 or N_SCORE_BINS not in widths:
            raise ContractViolationError(
                self.name, f"expected (embedding, 10-bin distribution) outputs, found {widths}"
            )
        self._dist_index = widths.index(N_SCORE_BINS)
        self._embed_index = 1 - self._dist_index
        embed_dim = widths[self._embed_index]
        if not isinstance(embed_dim, int):
            raise ContractViolationError(self.name, "embedding width must be static")
        self.embed_dim = embed_dim
        logger.debug("Loaded %s (B=%d)", self.name, self.embed_dim)

    def run(self, img: RgbImage) -> tuple[np.ndarray, ScoreDistribution]:
        x = (img.pixels * 2.0 - 1.0).astype(np.float32)[np.newaxis]
        if self._channels_first:
            x = np.transpose(x, (0, 3, 1, 2))
        outputs = self._session.run(None, {self._input_name: x})
        embedding = np.asarray(outputs[self._embed_index], dtype=np.float64).reshape(-1)
        probs = np.asarray(outputs[self._dist_index], dtype=np.float64).reshape(-1)
        try:
            return embedding, ScoreDistribution(probs)
        except ValueError as e:
            raise ContractViolationError(self.name, str(e))

    def __repr__(self) -> str:
        return f"OnnxExtractor({str(self.model_path)!r}, role={self.role!r})"


def _is_channels_first(shape: list[Any]) -> bool:
    return len(shape) == 4 and shape[1] == 3 and shape[3] != 3


def _last_dim(shape: list[Any]) -> Any:
    return shape[-1] if shape else None


def resolve_model_path(path: str | Path) -> Path:
    """Resolve a relative model path against UGCRANK_MODEL_PATH, if set."""
    path = Path(path)
    env = os.environ.get(MODEL_PATH_ENV)
    if not path.is_absolute() and not path.exists() and env:
        return Path(env) / path
    return path


def load_extractors(spec: str) -> tuple[FeatureExtractor, FeatureExtractor]:
    """Build the (aesthetic, technical) pair from a CLI spec.

    Args:
        spec: ``analytic`` or ``onnx:PATH_A,PATH_T``.

    Raises:
        ValueError: If the spec is malformed.
        ExtractorUnavailableError: If an ONNX model cannot be loaded.
    """
    if spec == "analytic":
        return AnalyticExtractor("aesthetic"), AnalyticExtractor("technical")
    if spec.startswith("onnx:"):
        paths = spec[len("onnx:") :].split(",")
        if len(paths) != 2 or not all(paths):
            raise ValueError("onnx extractor spec must be onnx:PATH_A,PATH_T")
        return OnnxExtractor(paths[0], "aesthetic"), OnnxExtractor(paths[1], "technical")
    raise ValueError(f"unknown extractor '{spec}' (expected 'analytic' or 'onnx:PATH_A,PATH_T')")


def extractor_identity(aesthetic: FeatureExtractor, technical: FeatureExtractor) -> str:
    """Identity string recorded in checkpoints and feature stores."""
    return f"{aesthetic.name}+{technical.name}"


def probe_image(size: int = 224) -> RgbImage:
    """Deterministic non-trivial test pattern for contract checks."""
    yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    pixels = np.stack(
        [xx, yy, 0.5 + 0.5 * np.sin(8 * np.pi * xx * yy)],
        axis=-1,
    )
    return RgbImage(pixels=np.clip(pixels, 0.0, 1.0))


def check_extractor_contract(extractor: FeatureExtractor) -> None:
    """Fail fast unless the extractor is deterministic and length-correct.

    Raises:
        ContractViolationError: On wrong output lengths or differing reruns.
    """
    probe = probe_image()
    first_embedding, first_dist = extractor.run(probe)
    second_embedding, second_dist = extractor.run(probe)

    if first_embedding.shape != (extractor.embed_dim,):
        raise ContractViolationError(
            extractor.name,
            f"embedding has {first_embedding.size} values, declared {extractor.embed_dim}",
        )
    if not np.all(np.isfinite(first_embedding)):
        raise ContractViolationError(extractor.name, "embedding has non-finite values")
    if not (
        np.array_equal(first_embedding, second_embedding)
        and np.array_equal(first_dist.probs, second_dist.probs)
    ):
        raise ContractViolationError(extractor.name, "outputs differ for identical input")
