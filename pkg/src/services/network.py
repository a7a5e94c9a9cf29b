"""Siamese MLP scoring network: forward pass, hinge ranking loss and gradients."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.models import (
    DenseLayer,
    DimensionMismatchError,
    FeatureVector,
    NormalizerStats,
    NumericError,
    RankerModel,
)
from src.services.features import apply_normalizer
from src.utils.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)

DEFAULT_HIDDEN = (512, 256, 128)


def init_model(
    input_dim: int,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
    seed: int = 0,
    normalizer: Optional[NormalizerStats] = None,
    extractor: str = "",
) -> RankerModel:
    """Fresh model with uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) weights and zero biases.

    Args:
        input_dim: Feature dimension D.
        hidden: Hidden layer widths.
        seed: Initialization seed.
        normalizer: Feature statistics; identity (mean 0, std 1) when omitted.
        extractor: Extractor identity string.

    Returns:
        A float32-exact RankerModel.
    """
    if input_dim < 1:
        raise ValueError("input_dim must be >= 1")
    if normalizer is None:
        normalizer = NormalizerStats(np.zeros(input_dim), np.ones(input_dim))

    rng = make_rng(derive_seed(seed, "init"))
    dims = [input_dim, *hidden, 1]
    layers = []
    for fan_in, fan_out in zip(dims, dims[1:]):
        bound = math.sqrt(6.0 / fan_in)
        layers.append(
            DenseLayer(
                weight=rng.uniform(-bound, bound, size=(fan_in, fan_out)),
                bias=np.zeros(fan_out),
            )
        )
    model = RankerModel(layers=layers, normalizer=normalizer, extractor=extractor)
    return model.float32_exact()


@dataclass
class _Trace:
    """Activations of one forward pass, kept for backprop."""

    inputs: list[np.ndarray]
    pre_activations: list[np.ndarray]
    scores: np.ndarray


def _as_batch(model: RankerModel, x: FeatureVector | np.ndarray) -> np.ndarray:
    arr = np.asarray(x.values if isinstance(x, FeatureVector) else x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis]
    if arr.shape[-1] != model.input_dim:
        raise DimensionMismatchError(model.input_dim, arr.shape[-1])
    return arr


def _run(model: RankerModel, batch: np.ndarray) -> _Trace:
    h = apply_normalizer(batch, model.normalizer)
    inputs, pre = [], []
    last = len(model.layers) - 1
    for i, layer in enumerate(model.layers):
        inputs.append(h)
        a = h @ layer.weight + layer.bias
        pre.append(a)
        h = a if i == last else np.maximum(a, 0.0)
    return _Trace(inputs=inputs, pre_activations=pre, scores=h[:, 0])


def forward_batch(model: RankerModel, x: np.ndarray) -> np.ndarray:
    """Scores of a (N, D) batch of raw (unnormalized) feature vectors.

    Raises:
        DimensionMismatchError: If the vectors are not D long.
        NumericError: If any score is not finite.
    """
    scores = _run(model, _as_batch(model, x)).scores
    if not np.all(np.isfinite(scores)):
        raise NumericError("non-finite score in forward pass")
    return scores


def forward(model: RankerModel, x: FeatureVector | np.ndarray) -> float:
    """Score of one feature vector."""
    return float(forward_batch(model, x)[0])


def hinge_pair_loss(
    s_pos: float, s_neg: float, y_pos: int = 1, y_neg: int = 0, margin: float = 1.0
) -> float:
    """max(0, m - delta * (s_pos - s_neg)) with delta = 1 if y_pos >= y_neg else -1."""
    delta = 1.0 if y_pos >= y_neg else -1.0
    return max(0.0, margin - delta * (s_pos - s_neg))


def hinge_losses(s_pos: np.ndarray, s_neg: np.ndarray, margin: float) -> np.ndarray:
    """Per-pair hinge losses for positives ranked above negatives."""
    return np.maximum(0.0, margin - (s_pos - s_neg))


def backward(
    model: RankerModel,
    x_pos: np.ndarray,
    x_neg: np.ndarray,
    margin: float = 1.0,
    weight_decay: float = 0.0,
) -> tuple[float, list[np.ndarray]]:
    """Mean hinge loss of a pair batch and its exact gradient.

    Both members of every pair go through the same parameters in a single
    pass. The gradient list matches ``model.parameters()`` ([W1, b1, ...]) and
    includes ``weight_decay * theta``; the returned loss is the hinge mean only.

    Raises:
        ValueError: If the batch is empty.
        NumericError: If a gradient is not finite (names the layer, 1-based).
    """
    x_pos = _as_batch(model, x_pos)
    x_neg = _as_batch(model, x_neg)
    n = x_pos.shape[0]
    if n == 0:
        raise ValueError("backward needs a non-empty batch")
    if x_neg.shape[0] != n:
        raise ValueError("positive and negative batches differ in size")

    trace = _run(model, np.concatenate([x_pos, x_neg]))
    s_pos, s_neg = trace.scores[:n], trace.scores[n:]
    losses = hinge_losses(s_pos, s_neg, margin)
    loss = float(losses.mean())
    if not math.isfinite(loss):
        raise NumericError("non-finite loss")

    active = (losses > 0.0).astype(np.float64) / n
    upstream = np.concatenate([-active, active])[:, np.newaxis]

    grads: list[np.ndarray] = [None] * (2 * len(model.layers))
    for i in reversed(range(len(model.layers))):
        layer = model.layers[i]
        grad_w = trace.inputs[i].T @ upstream + weight_decay * layer.weight
        grad_b = upstream.sum(axis=0) + weight_decay * layer.bias
        if not (np.all(np.isfinite(grad_w)) and np.all(np.isfinite(grad_b))):
            raise NumericError(f"non-finite gradient in layer {i + 1}")
        grads[2 * i], grads[2 * i + 1] = grad_w, grad_b
        if i > 0:
            upstream = (upstream @ layer.weight.T) * (trace.pre_activations[i - 1] > 0.0)
    return loss, grads


def pair_objective(
    model: RankerModel,
    x_pos: np.ndarray,
    x_neg: np.ndarray,
    margin: float = 1.0,
    weight_decay: float = 0.0,
) -> float:
    """Hinge mean plus 0.5 * weight_decay * |theta|^2; ``backward`` is its gradient."""
    scores_pos = forward_batch(model, x_pos)
    scores_neg = forward_batch(model, x_neg)
    penalty = sum(float(np.sum(p * p)) for p in model.parameters())
    return float(hinge_losses(scores_pos, scores_neg, margin).mean()) + 0.5 * weight_decay * penalty


def _pattern(model: RankerModel, x_pos: np.ndarray, x_neg: np.ndarray, margin: float) -> bytes:
    """ReLU and hinge on/off pattern; the objective is smooth while it holds."""
    n = x_pos.shape[0]
    trace = _run(model, np.concatenate([x_pos, x_neg]))
    masks = [a > 0.0 for a in trace.pre_activations[:-1]]
    masks.append(hinge_losses(trace.scores[:n], trace.scores[n:], margin) > 0.0)
    return b"".join(np.packbits(m.ravel()).tobytes() for m in masks)


def check_gradients(
    model: RankerModel,
    x_pos: np.ndarray,
    x_neg: np.ndarray,
    margin: float = 1.0,
    weight_decay: float = 0.0,
    h: float = 1e-4,
) -> tuple[float, int]:
    """Compare ``backward`` with central finite differences of ``pair_objective``.

    Coordinates whose perturbation flips a ReLU or hinge are skipped, since the
    objective has a kink between the two probe points there.

    Returns:
        (max relative error |a - n| / max(|a|, |n|, 1e-6), coordinates checked).
    """
    x_pos = _as_batch(model, x_pos)
    x_neg = _as_batch(model, x_neg)
    _, analytic = backward(model, x_pos, x_neg, margin, weight_decay)
    base = _pattern(model, x_pos, x_neg, margin)

    worst, checked = 0.0, 0
    for param, grad in zip(model.parameters(), analytic):
        flat, flat_grad = param.reshape(-1), grad.reshape(-1)
        for j in range(flat.size):
            original = flat[j]
            flat[j] = original + h
            plus = pair_objective(model, x_pos, x_neg, margin, weight_decay)
            plus_pattern = _pattern(model, x_pos, x_neg, margin)
            flat[j] = original - h
            minus = pair_objective(model, x_pos, x_neg, margin, weight_decay)
            minus_pattern = _pattern(model, x_pos, x_neg, margin)
            flat[j] = original

            if plus_pattern != base or minus_pattern != base:
                continue
            numeric = (plus - minus) / (2.0 * h)
            a = float(flat_grad[j])
            error = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
            worst = max(worst, error)
            checked += 1

    logger.debug("Gradient check: %d coordinates, max relative error %.3e", checked, worst)
    return worst, checked
