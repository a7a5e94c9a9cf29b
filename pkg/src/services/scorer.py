"""Rank images by trained model score."""

import logging
import warnings
from pathlib import Path
from typing import Optional, Sequence

from src.models import ExtractorMismatchWarning, RankerError, RankerModel, ScoringResult
from src.services.extractors import FeatureExtractor, extractor_identity
from src.services.features import extract
from src.services.network import forward
from src.utils.parallel import parallel_map

logger = logging.getLogger(__name__)


def score_images(
    model: RankerModel,
    aesthetic: FeatureExtractor,
    technical: FeatureExtractor,
    paths: Sequence[str | Path],
    threads: Optional[int] = None,
    show_progress: bool = False,
) -> ScoringResult:
    """Score images and sort them best first.

    Ties are broken by path in lexicographic order. Images that fail to
    decode are collected in ``errors``; the rest are still scored.
    """
    identity = extractor_identity(aesthetic, technical)
    if model.extractor and model.extractor != identity:
        message = f"model was trained with '{model.extractor}', scoring with '{identity}'"
        logger.warning(message)
        warnings.warn(message, ExtractorMismatchWarning, stacklevel=2)

    def work(path: str | Path) -> tuple[Optional[float], Optional[str]]:
        try:
            return forward(model, extract(path, aesthetic, technical)), None
        except RankerError as e:
            logger.warning("Cannot score %s: %s", path, e.message)
            return None, e.message

    outcomes = parallel_map(work, list(paths), threads, desc="score", show_progress=show_progress)

    result = ScoringResult()
    for path, (score, error) in zip(paths, outcomes):
        if score is None:
            result.errors.append((str(path), error or "unknown error"))
        else:
            result.ranked.append((str(path), score))
    result.ranked.sort(key=lambda item: (-item[1], item[0]))
    return result
