"""Services for pair generation, feature extraction, ranking and evaluation."""

from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import (
    build_val_triples,
    filter_split,
    group_by_style,
    load_manifest,
    proxy_score,
    require_scored,
    save_manifest,
    serialize_manifest,
)
from .distortion import apply_distortion, distort_chain, sample_chain, sample_spec
from .evaluation import (
    BaselineKind,
    baseline_score,
    evaluate,
    format_report,
    pair_accuracy,
    pearson,
    ranked_pair_accuracy,
)
from .exporter import content_address, generate_output_path, save_image
from .extractors import (
    AnalyticExtractor,
    FeatureExtractor,
    OnnxExtractor,
    analytic_extract,
    check_extractor_contract,
    load_extractors,
)
from .features import (
    FeatureStore,
    apply_normalizer,
    build_feature_store,
    expected_score,
    extract,
    extract_image,
    fit_normalizer,
    load_feature_store,
    save_feature_store,
)
from .fixtures import make_fixture_corpus
from .loader import load_image, rescale, validate_image_file
from .network import backward, check_gradients, forward, hinge_pair_loss, init_model
from .optimizer import AdamOptimizer, PlateauScheduler
from .pairgen import build_pairs, eligible_sets, materialize, read_pair_file, replay_negative
from .scorer import score_images
from .trainer import train, validation_accuracy

__all__ = [
    # Corpus
    "load_manifest",
    "save_manifest",
    "serialize_manifest",
    "proxy_score",
    "filter_split",
    "group_by_style",
    "build_val_triples",
    "require_scored",
    # Loader / exporter
    "load_image",
    "rescale",
    "validate_image_file",
    "save_image",
    "content_address",
    "generate_output_path",
    # Distortion
    "sample_spec",
    "sample_chain",
    "apply_distortion",
    "distort_chain",
    # Pair generation
    "eligible_sets",
    "build_pairs",
    "materialize",
    "read_pair_file",
    "replay_negative",
    # Features
    "FeatureExtractor",
    "AnalyticExtractor",
    "OnnxExtractor",
    "analytic_extract",
    "load_extractors",
    "check_extractor_contract",
    "extract",
    "extract_image",
    "expected_score",
    "fit_normalizer",
    "apply_normalizer",
    "FeatureStore",
    "build_feature_store",
    "save_feature_store",
    "load_feature_store",
    # Ranker
    "init_model",
    "forward",
    "hinge_pair_loss",
    "backward",
    "check_gradients",
    "AdamOptimizer",
    "PlateauScheduler",
    "train",
    "validation_accuracy",
    "save_checkpoint",
    "load_checkpoint",
    "score_images",
    # Evaluation
    "BaselineKind",
    "pearson",
    "pair_accuracy",
    "ranked_pair_accuracy",
    "baseline_score",
    "evaluate",
    "format_report",
    # Fixtures
    "make_fixture_corpus",
]
