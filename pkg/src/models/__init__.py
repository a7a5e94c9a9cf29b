"""Data models for the ranking toolkit."""

from .config import PairConfig, TrainConfig
from .distortion import (
    DEFAULT_RANGES,
    ROTATION_ANGLES,
    DistortionKind,
    DistortionRanges,
    DistortionSpec,
)
from .errors import (
    CheckpointError,
    ContractViolationError,
    DegenerateImageError,
    DimensionMismatchError,
    ExtractorMismatchWarning,
    ExtractorUnavailableError,
    FeatureExtractionError,
    FeatureStoreError,
    ImageDecodeError,
    ImageNotFoundError,
    LeakageError,
    ManifestParseError,
    ManifestValidationError,
    NoPairDataError,
    NumericError,
    OutputWriteError,
    PairDropError,
    RankerError,
    UndefinedMetricError,
    UndefinedScoreError,
)
from .features import FeatureVector, NormalizerStats, ScoreDistribution, feature_dim
from .history import EpochRecord, TrainingResult
from .image import RgbImage
from .metrics import SkippedStyle, StyleGroup, StyleMetrics
from .pair import RankedPair
from .ranker import DenseLayer, RankerModel, ValTriple
from .record import Bucket, ImageRecord, Manifest, Split
from .result import EvalReport, MaterializeResult, ModelReport, ScoringResult

__all__ = [
    # Data classes
    "Bucket",
    "DenseLayer",
    "DistortionKind",
    "DistortionRanges",
    "DistortionSpec",
    "EpochRecord",
    "EvalReport",
    "FeatureVector",
    "ImageRecord",
    "Manifest",
    "MaterializeResult",
    "ModelReport",
    "NormalizerStats",
    "PairConfig",
    "RankedPair",
    "RankerModel",
    "RgbImage",
    "ScoreDistribution",
    "ScoringResult",
    "SkippedStyle",
    "Split",
    "StyleGroup",
    "StyleMetrics",
    "TrainConfig",
    "TrainingResult",
    "ValTriple",
    "DEFAULT_RANGES",
    "ROTATION_ANGLES",
    "feature_dim",
    # Errors
    "RankerError",
    "CheckpointError",
    "ContractViolationError",
    "DegenerateImageError",
    "DimensionMismatchError",
    "ExtractorMismatchWarning",
    "ExtractorUnavailableError",
    "FeatureExtractionError",
    "FeatureStoreError",
    "ImageDecodeError",
    "ImageNotFoundError",
    "LeakageError",
    "ManifestParseError",
    "ManifestValidationError",
    "NoPairDataError",
    "NumericError",
    "OutputWriteError",
    "PairDropError",
    "UndefinedMetricError",
    "UndefinedScoreError",
]
