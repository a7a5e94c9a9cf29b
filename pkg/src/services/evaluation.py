"""Evaluation of scoring models against engagement-derived proxy scores."""

import logging
import math
from enum import Enum
from itertools import combinations
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from src.models import (
    EvalReport,
    ImageRecord,
    LeakageError,
    Manifest,
    ModelReport,
    RankerModel,
    ScoreDistribution,
    SkippedStyle,
    Split,
    StyleGroup,
    StyleMetrics,
    UndefinedMetricError,
)
from src.models.features import N_SCORE_BINS
from src.services.corpus import filter_split, group_by_style, proxy_score, require_scored
from src.services.features import FeatureStore, expected_score
from src.services.network import forward_batch
from src.utils.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)

DEFAULT_PAIRS_PER_STYLE = 50

# Scores every record of a list at once
Scorer = Callable[[Sequence[ImageRecord]], np.ndarray]


class BaselineKind(Enum):
    """Expected-score baselines, one per extractor head."""

    AESTHETIC = "aesthetic"
    TECHNICAL = "technical"

    @property
    def model_name(self) -> str:
        return f"baseline-{self.value}"


def pearson(f_scores: Sequence[float], g_scores: Sequence[float]) -> float:
    """Pearson correlation: covariance over the product of the standard deviations.

    Raises:
        UndefinedMetricError: With fewer than 2 values or a constant input.
    """
    f = np.asarray(f_scores, dtype=np.float64)
    g = np.asarray(g_scores, dtype=np.float64)
    if f.shape != g.shape or f.ndim != 1:
        raise ValueError("pearson needs two vectors of equal length")
    if f.size < 2:
        raise UndefinedMetricError("pearson", "fewer than 2 values")
    if np.all(f == f[0]) or np.all(g == g[0]):
        raise UndefinedMetricError("pearson", "constant input")

    r = float(stats.pearsonr(f, g).statistic)
    return min(1.0, max(-1.0, r))


def _rank_correlation(fn: Callable, f: np.ndarray, g: np.ndarray) -> Optional[float]:
    value = fn(f, g)[0]
    return None if value is None or math.isnan(value) else float(value)


def sample_style_pairs(
    g_scores: Sequence[float], n_pairs: int = DEFAULT_PAIRS_PER_STYLE, seed: int = 0
) -> list[tuple[int, int]]:
    """Sample unordered index pairs with distinct proxy scores, without replacement.

    Returns min(n_pairs, #candidates) pairs (i, j), i < j, in sampling order.

    Raises:
        UndefinedMetricError: If no pair has distinct proxy scores.
    """
    g = np.asarray(g_scores, dtype=np.float64)
    candidates = [(i, j) for i, j in combinations(range(g.size), 2) if g[i] != g[j]]
    if not candidates:
        raise UndefinedMetricError("pair accuracy", "no pairs with distinct proxy scores")
    k = min(n_pairs, len(candidates))
    picks = make_rng(seed).choice(len(candidates), size=k, replace=False)
    return [candidates[int(p)] for p in picks]


def pair_accuracy(
    style: StyleGroup,
    f: Sequence[float] | Callable[[ImageRecord], float],
    n_pairs: int = DEFAULT_PAIRS_PER_STYLE,
    seed: int = 0,
) -> tuple[float, int]:
    """Fraction of sampled pairs whose model order matches the proxy order.

    Ties in ``f`` count as misclassified.

    Args:
        style: Images of one style with proxy scores.
        f: Model scores aligned with ``style.records``, or a per-record scoring function.
        n_pairs: Pairs to sample (capped at the number of candidates).
        seed: Sampling seed.

    Returns:
        (accuracy, number of pairs).

    Raises:
        UndefinedMetricError: If no pair has distinct proxy scores.
    """
    scores = np.asarray([f(r) for r in style.records] if callable(f) else f, dtype=np.float64)
    if scores.shape != (len(style),):
        raise ValueError("one model score per record required")
    g = style.proxy_scores

    pairs = sample_style_pairs(g, n_pairs, seed)
    correct = 0
    for i, j in pairs:
        hi, lo = (i, j) if g[i] > g[j] else (j, i)
        correct += int(scores[hi] > scores[lo])
    return correct / len(pairs), len(pairs)


def ranked_pair_accuracy(pos_scores: Sequence[float], neg_scores: Sequence[float]) -> float:
    """Fraction of (preferred, other) pairs scored strictly in order.

    Raises:
        UndefinedMetricError: If there are no pairs.
    """
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.shape != neg.shape:
        raise ValueError("score vectors differ in length")
    if pos.size == 0:
        raise UndefinedMetricError("pair accuracy", "no pairs")
    return float(np.mean(pos > neg))


def baseline_score(kind: BaselineKind | str, dist: ScoreDistribution) -> float:
    """Expected score of the head's predicted distribution."""
    BaselineKind(kind)
    return expected_score(dist)


def model_scorer(model: RankerModel, store: FeatureStore) -> Scorer:
    """Scorer running ``model`` on stored features."""

    def score(records: Sequence[ImageRecord]) -> np.ndarray:
        return forward_batch(model, store.matrix([r.id for r in records]))

    return score


def baseline_scorer(kind: BaselineKind | str, store: FeatureStore) -> Scorer:
    """Scorer taking the expected score of one head's stored distribution."""
    kind = BaselineKind(kind)
    block = store.embed_dim + N_SCORE_BINS
    offset = (0 if kind is BaselineKind.AESTHETIC else block) + store.embed_dim

    def score(records: Sequence[ImageRecord]) -> np.ndarray:
        values = store.matrix([r.id for r in records])
        probs = values[:, offset : offset + N_SCORE_BINS]
        # float32 storage can leave the sum slightly off 1
        probs = probs / probs.sum(axis=1, keepdims=True)
        return np.array([baseline_score(kind, ScoreDistribution(p)) for p in probs])

    return score


def check_leakage(test: Manifest, train: Optional[Manifest]) -> None:
    """Reject test records whose id also appears in train or val.

    Styles shared between test and train/val only produce a warning.

    Raises:
        LeakageError: Listing every leaked id.
    """
    if train is None:
        return
    seen = [r for r in train.records if r.split is not Split.TEST]
    leaked = {r.id for r in test.records} & {r.id for r in seen}
    if leaked:
        raise LeakageError(sorted(leaked))

    shared_styles = {r.style_id for r in test.records} & {r.style_id for r in seen}
    if shared_styles:
        logger.warning(
            "Test styles also present in train/val: %s", ", ".join(sorted(shared_styles))
        )


def style_groups(test: Manifest) -> tuple[list[StyleGroup], list[SkippedStyle]]:
    """Group test records by style with their proxy scores.

    Styles with fewer than two images cannot be evaluated and are returned
    as skipped.
    """
    groups, skipped = [], []
    for style_id, records in group_by_style(test).items():
        if len(records) < 2:
            skipped.append(SkippedStyle(style_id, "fewer than 2 images"))
            continue
        scores = np.array([proxy_score(r) for r in records])
        groups.append(StyleGroup(style_id=style_id, records=tuple(records), proxy_scores=scores))
    return groups, skipped


def evaluate(
    models: Mapping[str, Scorer],
    test_manifest: Manifest,
    seed: int = 0,
    pairs_per_style: int = DEFAULT_PAIRS_PER_STYLE,
    train_manifest: Optional[Manifest] = None,
) -> EvalReport:
    """Per-style Pearson and pair accuracy of every model, with macro averages.

    Every model is evaluated on the same sampled pairs: the sampling seed of
    a style is derived from ``seed`` and the style id.

    Args:
        models: Name -> scorer, reported in the given order.
        test_manifest: Test records (other splits are ignored).
        seed: Pair-sampling seed.
        pairs_per_style: Pairs sampled per style.
        train_manifest: Training manifest checked for id leakage.

    Raises:
        LeakageError: If test ids occur in train/val.
        UndefinedScoreError: If a test record has no votes.
    """
    test = filter_split(test_manifest, Split.TEST)
    check_leakage(test, train_manifest)
    require_scored(test)
    groups, too_small = style_groups(test)
    logger.info("Evaluating %d models on %d styles (%d images)", len(models), len(groups), len(test))

    report = EvalReport(seed=seed, pairs_per_style=pairs_per_style)
    for name, scorer in models.items():
        model_report = ModelReport(name=name, skipped=list(too_small))
        all_scores = np.asarray(scorer(list(test.records)), dtype=np.float64)
        by_id = dict(zip((r.id for r in test.records), all_scores))

        for group in groups:
            f = np.array([by_id[r.id] for r in group.records])
            try:
                rho = pearson(f, group.proxy_scores)
                accuracy, n_pairs = pair_accuracy(
                    group, f, pairs_per_style, derive_seed(seed, group.style_id)
                )
            except UndefinedMetricError as e:
                logger.info("%s: style %s skipped (%s)", name, group.style_id, e.message)
                model_report.skipped.append(SkippedStyle(group.style_id, e.message))
                continue

            model_report.styles.append(
                StyleMetrics(
                    style_id=group.style_id,
                    n_images=len(group),
                    pearson=rho,
                    accuracy=accuracy,
                    n_pairs=n_pairs,
                    spearman=_rank_correlation(stats.spearmanr, f, group.proxy_scores),
                    kendall=_rank_correlation(stats.kendalltau, f, group.proxy_scores),
                )
            )
        report.models.append(model_report)
    return report


def _fmt(value: Optional[float], width: int) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-".rjust(width)
    return f"{value:{width}.3f}"


def format_report(report: EvalReport, per_style: bool = False) -> str:
    """Aligned plain-text table: one row per model with macro averages.

    With ``per_style`` a detail block per model follows.
    """
    name_width = max([len("Model")] + [len(m.name) for m in report.models])
    header = f"{'Model':<{name_width}}  {'Pearson':>8}  {'Accuracy':>8}  {'Styles':>6}  {'Skipped':>7}"
    lines = [header, "-" * len(header)]
    for m in report.models:
        lines.append(
            f"{m.name:<{name_width}}  {_fmt(m.mean_pearson, 8)}  {_fmt(m.mean_accuracy, 8)}"
            f"  {len(m.styles):>6}  {len(m.skipped):>7}"
        )

    if per_style:
        for m in report.models:
            lines += ["", f"{m.name}:"]
            style_width = max([len("Style")] + [len(s.style_id) for s in m.styles + m.skipped])
            lines.append(
                f"  {'Style':<{style_width}}  {'Images':>6}  {'Pearson':>8}  {'Accuracy':>8}"
                f"  {'Pairs':>5}  {'Spearman':>8}  {'Kendall':>8}"
            )
            for s in m.styles:
                lines.append(
                    f"  {s.style_id:<{style_width}}  {s.n_images:>6}  {_fmt(s.pearson, 8)}"
                    f"  {_fmt(s.accuracy, 8)}  {s.n_pairs:>5}  {_fmt(s.spearman, 8)}"
                    f"  {_fmt(s.kendall, 8)}"
                )
            for s in m.skipped:
                lines.append(f"  {s.style_id:<{style_width}}  skipped: {s.reason}")

    lines += ["", f"seed {report.seed}, {report.pairs_per_style} pairs per style"]
    return "\n".join(lines)
