"""Result data classes for materialization, scoring and evaluation."""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .metrics import SkippedStyle, StyleMetrics
from .pair import RankedPair


@dataclass
class MaterializeResult:
    """Outcome of writing pairs and distorted negatives to disk.

    Attributes:
        pairs: Pairs written to the pair file, with paths filled in.
        files_written: Distorted images newly written (existing ones are skipped).
        errors: (pair index, message) for every dropped pair.
        pair_file: Location of the pair file.
    """

    pairs: list[RankedPair] = field(default_factory=list)
    files_written: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)
    pair_file: str = ""

    @property
    def total(self) -> int:
        return len(self.pairs) + len(self.errors)

    @property
    def drop_ratio(self) -> float:
        if self.total == 0:
            return 0.0
        return len(self.errors) / self.total


@dataclass
class ScoringResult:
    """Images ranked by model score.

    Attributes:
        ranked: (path, score) sorted by descending score, ties by path.
        errors: (path, message) for images that could not be scored.
    """

    ranked: list[tuple[str, float]] = field(default_factory=list)
    errors: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class ModelReport:
    """Evaluation of one scoring model across styles.

    Attributes:
        name: Model identity (checkpoint, or baseline kind).
        styles: Per-style metrics.
        skipped: Styles whose metrics are undefined.
    """

    name: str
    styles: list[StyleMetrics] = field(default_factory=list)
    skipped: list[SkippedStyle] = field(default_factory=list)

    @property
    def mean_pearson(self) -> float:
        """Arithmetic mean of per-style Pearson correlations."""
        return float(np.mean([s.pearson for s in self.styles])) if self.styles else float("nan")

    @property
    def mean_accuracy(self) -> float:
        """Arithmetic mean of per-style pair accuracies."""
        return float(np.mean([s.accuracy for s in self.styles])) if self.styles else float("nan")


@dataclass
class EvalReport:
    """Results of evaluating scoring models against proxy ground truth.

    Attributes:
        models: One report per scoring model, in the order given.
        seed: Pair-sampling seed.
        pairs_per_style: Requested sampled pairs per style.
    """

    models: list[ModelReport] = field(default_factory=list)
    seed: int = 0
    pairs_per_style: int = 50

    def get(self, name: str) -> ModelReport:
        for report in self.models:
            if report.name == name:
                return report
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        """Machine-readable form with per-style detail."""
        return {
            "seed": self.seed,
            "pairs_per_style": self.pairs_per_style,
            "models": [
                {
                    "name": m.name,
                    "mean_pearson": m.mean_pearson,
                    "mean_accuracy": m.mean_accuracy,
                    "styles": [
                        {
                            "style_id": s.style_id,
                            "n_images": s.n_images,
                            "pearson": s.pearson,
                            "accuracy": s.accuracy,
                            "n_pairs": s.n_pairs,
                            "spearman": s.spearman,
                            "kendall": s.kendall,
                        }
                        for s in m.styles
                    ],
                    "skipped": [
                        {"style_id": s.style_id, "reason": s.reason} for s in m.skipped
                    ],
                }
                for m in self.models
            ],
        }
