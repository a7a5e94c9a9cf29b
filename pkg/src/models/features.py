"""ScoreDistribution and FeatureVector data classes."""

from dataclasses import dataclass, field

import numpy as np

N_SCORE_BINS = 10
GEOMETRY_DIM = 3
SCORE_VALUES = np.arange(1, N_SCORE_BINS + 1, dtype=np.float64)


def feature_dim(embed_dim: int) -> int:
    """Feature vector length for two backbones of embedding width ``embed_dim``."""
    return 2 * (embed_dim + N_SCORE_BINS) + GEOMETRY_DIM


@dataclass(frozen=True)
class ScoreDistribution:
    """Predicted distribution over integer quality scores 1..10.

    Attributes:
        probs: probs[i] = Pr(score = i + 1).
    """

    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        """Validate shape, range and normalization."""
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (N_SCORE_BINS,):
            raise ValueError(f"score distribution needs {N_SCORE_BINS} bins, got {probs.shape}")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("score distribution probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > 1e-5:
            raise ValueError(f"score distribution sums to {probs.sum():.6f}, expected 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls) -> "ScoreDistribution":
        return cls(np.full(N_SCORE_BINS, 1.0 / N_SCORE_BINS))

    @classmethod
    def one_hot(cls, score: int) -> "ScoreDistribution":
        """All mass on ``score`` (1..10)."""
        probs = np.zeros(N_SCORE_BINS)
        probs[score - 1] = 1.0
        return cls(probs)


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-dimension feature vector of one image.

    Layout: [aesthetic embedding | aesthetic distribution | technical embedding |
    technical distribution | height | width | width / height].

    Attributes:
        values: The D reals.
        embed_dim: Per-backbone embedding width B.
    """

    values: np.ndarray = field(repr=False)
    embed_dim: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (feature_dim(self.embed_dim),):
            raise ValueError(
                f"feature vector length {values.shape} does not match "
                f"B={self.embed_dim} (D={feature_dim(self.embed_dim)})"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("feature vector has non-finite entries")
        if values[-1] <= 0:
            raise ValueError("aspect ratio must be positive")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def geometry(self) -> tuple[float, float, float]:
        """(height, width, aspect ratio) of the original image."""
        h, w, ar = self.values[-GEOMETRY_DIM:]
        return float(h), float(w), float(ar)

    def distribution(self, role: str) -> ScoreDistribution:
        """Score distribution of the ``aesthetic`` or ``technical`` head."""
        block = self.embed_dim + N_SCORE_BINS
        offset = {"aesthetic": 0, "technical": block}[role] + self.embed_dim
        return ScoreDistribution(self.values[offset : offset + N_SCORE_BINS])


@dataclass(frozen=True)
class NormalizerStats:
    """Per-coordinate z-score statistics fitted on the train split."""

    mean: np.ndarray = field(repr=False)
    std: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]
