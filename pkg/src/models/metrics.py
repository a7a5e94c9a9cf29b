"""StyleGroup and StyleMetrics data classes for evaluation."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .record import ImageRecord


@dataclass(frozen=True)
class StyleGroup:
    """Test images of one style with their proxy ground truth.

    Attributes:
        style_id: Shared style.
        records: Records of the style, in manifest order.
        proxy_scores: u / (u + d) per record.
    """

    style_id: str
    records: tuple[ImageRecord, ...]
    proxy_scores: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.records) != len(self.proxy_scores):
            raise ValueError("one proxy score per record required")
        if any(r.style_id != self.style_id for r in self.records):
            raise ValueError(f"records outside style {self.style_id}")

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class StyleMetrics:
    """Metrics of one scoring model on one style.

    Attributes:
        style_id: Evaluated style.
        n_images: Images in the style.
        pearson: Pearson correlation with proxy scores.
        accuracy: Sampled pair accuracy.
        n_pairs: Pairs the accuracy was computed over.
        spearman: Spearman rank correlation (supplementary).
        kendall: Kendall tau (supplementary).
    """

    style_id: str
    n_images: int
    pearson: float
    accuracy: float
    n_pairs: int
    spearman: Optional[float] = None
    kendall: Optional[float] = None


@dataclass(frozen=True)
class SkippedStyle:
    """A style without a defined metric, listed instead of imputed."""

    style_id: str
    reason: str
