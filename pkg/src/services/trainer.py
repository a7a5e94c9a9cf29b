"""Training loop of the Siamese ranker."""

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from src.models import (
    EpochRecord,
    NormalizerStats,
    NumericError,
    RankedPair,
    RankerModel,
    TrainConfig,
    TrainingResult,
    ValTriple,
)
from src.services.features import FeatureStore, fit_normalizer
from src.services.network import backward, forward_batch, init_model
from src.services.optimizer import AdamOptimizer, PlateauScheduler
from src.utils.jsonl import write_jsonl
from src.utils.progress import ProgressReporter
from src.utils.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)

HISTORY_FILE_NAME = "history.jsonl"

# (better, worse) positions within a (studio, good, bad) triple
TRIPLE_ORDER = ((0, 1), (0, 2), (1, 2))


def pair_matrices(store: FeatureStore, pairs: Sequence[RankedPair]) -> tuple[np.ndarray, np.ndarray]:
    """(positive, negative) feature matrices of training pairs."""
    return store.matrix([p.pos_id for p in pairs]), store.matrix([p.neg_id for p in pairs])


def triple_tensor(store: FeatureStore, triples: Sequence[ValTriple]) -> np.ndarray:
    """(T, 3, D) validation features, images ordered best to worst."""
    if not triples:
        return np.empty((0, 3, store.dim))
    return np.stack([store.matrix(list(t.ordered_ids)) for t in triples])


def validation_accuracy(model: RankerModel, val: np.ndarray) -> float:
    """Fraction of the 3 ordered pairs per triple scored strictly in order.

    Args:
        model: Model to evaluate.
        val: (T, 3, D) features, each triple ordered (studio, good UGC, bad UGC).

    Raises:
        ValueError: If there are no triples.
    """
    if val.shape[0] == 0:
        raise ValueError("validation needs at least one triple")
    scores = forward_batch(model, val.reshape(-1, val.shape[-1])).reshape(-1, 3)
    correct = sum(int(np.sum(scores[:, a] > scores[:, b])) for a, b in TRIPLE_ORDER)
    return correct / (len(TRIPLE_ORDER) * scores.shape[0])


def train(
    x_pos: np.ndarray,
    x_neg: np.ndarray,
    val: np.ndarray,
    cfg: TrainConfig,
    normalizer: Optional[NormalizerStats] = None,
    extractor: str = "",
    reporter: Optional[ProgressReporter] = None,
) -> TrainingResult:
    """Fit a ranker on (positive, negative) pairs with validation-based selection.

    Batches are drawn from a seeded shuffle each epoch. After every epoch the
    validation accuracy decides whether the model is the new best snapshot and
    feeds the plateau scheduler.

    Args:
        x_pos: (N, D) raw features of the preferred images.
        x_neg: (N, D) raw features of the other pair members.
        val: (T, 3, D) validation triples.
        cfg: Training hyperparameters.
        normalizer: Feature statistics; fitted on the training vectors when omitted.
        extractor: Extractor identity recorded in the model.
        reporter: Optional progress reporter (one stage, one tick per epoch).

    Returns:
        TrainingResult with the float32-exact best snapshot.

    Raises:
        ValueError: Without training pairs or validation triples.
        NumericError: On a non-finite loss or gradient (with epoch/batch).
    """
    x_pos = np.asarray(x_pos, dtype=np.float64)
    x_neg = np.asarray(x_neg, dtype=np.float64)
    n_pairs = x_pos.shape[0]
    if n_pairs == 0:
        raise ValueError("training needs at least one pair")
    if x_neg.shape != x_pos.shape:
        raise ValueError("positive and negative feature matrices differ in shape")
    if val.shape[0] == 0:
        raise ValueError("training needs at least one validation triple")

    if normalizer is None:
        normalizer = fit_normalizer(np.concatenate([x_pos, x_neg]))
    model = init_model(x_pos.shape[1], cfg.hidden, cfg.seed, normalizer, extractor)

    optimizer = AdamOptimizer(
        model.parameters(), lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps
    )
    scheduler = PlateauScheduler(optimizer, patience=cfg.patience, factor=cfg.lr_factor)
    shuffle_rng = make_rng(derive_seed(cfg.seed, "shuffle"))

    logger.info(
        "Training %s on %d pairs, %d validation triples",
        "-".join(str(d) for d in model.dims),
        n_pairs,
        val.shape[0],
    )
    if reporter is not None:
        reporter.start_stage("train", total=cfg.max_epochs, unit="epoch")

    result = TrainingResult(model=model.float32_exact())
    for epoch in range(1, cfg.max_epochs + 1):
        lr = optimizer.lr
        order = shuffle_rng.permutation(n_pairs)
        total_loss = 0.0
        for batch, start in enumerate(range(0, n_pairs, cfg.batch_size), start=1):
            idx = order[start : start + cfg.batch_size]
            try:
                loss, grads = backward(model, x_pos[idx], x_neg[idx], cfg.margin, cfg.weight_decay)
            except NumericError as e:
                raise NumericError(f"epoch {epoch}, batch {batch}: {e.details}")
            optimizer.step(grads)
            total_loss += loss * len(idx)

        epoch_loss = total_loss / n_pairs
        accuracy = validation_accuracy(model, val)
        improved = scheduler.step(accuracy, epoch)
        if improved:
            result.model = model.float32_exact()
            result.best_epoch = epoch
            result.best_accuracy = validation_accuracy(result.model, val)

        result.history.append(
            EpochRecord(epoch=epoch, loss=epoch_loss, val_accuracy=accuracy, lr=lr, improved=improved)
        )
        logger.debug(
            "Epoch %d: loss %.4f, val accuracy %.3f, lr %.2e%s",
            epoch,
            epoch_loss,
            accuracy,
            lr,
            " *" if improved else "",
        )
        if reporter is not None:
            reporter.update(1)
            reporter.set_postfix(loss=f"{epoch_loss:.3f}", acc=f"{accuracy:.3f}")

    if reporter is not None:
        reporter.complete_stage()
    logger.info(
        "Best validation accuracy %.3f at epoch %d", result.best_accuracy, result.best_epoch
    )
    return result


def write_history(path: str | Path, history: Sequence[EpochRecord]) -> int:
    """Write one JSON object (epoch, loss, val_accuracy, lr, improved) per epoch."""
    return write_jsonl(path, (record.to_dict() for record in history))
