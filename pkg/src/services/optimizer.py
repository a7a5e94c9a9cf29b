"""ADAM optimizer and reduce-on-plateau learning rate scheduler."""

import logging

import numpy as np

logger = logging.getLogger(__name__)


class AdamOptimizer:
    """ADAM with bias-corrected moments, updating parameter arrays in place.

    Weight decay is expected to be folded into the gradients by the caller.
    """

    def __init__(
        self,
        params: list[np.ndarray],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if lr <= 0:
            raise ValueError("lr must be > 0")
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m = [np.zeros_like(p) for p in params]
        self._v = [np.zeros_like(p) for p in params]

    def step(self, grads: list[np.ndarray]) -> None:
        """Apply one update."""
        if len(grads) != len(self.params):
            raise ValueError(f"expected {len(self.params)} gradients, got {len(grads)}")
        self.step_count += 1
        correction1 = 1.0 - self.beta1**self.step_count
        correction2 = 1.0 - self.beta2**self.step_count

        for param, grad, m, v in zip(self.params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            denom = np.sqrt(v / correction2) + self.eps
            param -= self.lr * (m / correction1) / denom


class PlateauScheduler:
    """Multiply the learning rate by ``factor`` after ``patience`` epochs without improvement.

    Tracks a metric to maximize (validation accuracy). The non-improvement
    counter resets after every reduction.
    """

    def __init__(self, optimizer: AdamOptimizer, patience: int = 5, factor: float = 0.5):
        if patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 < factor < 1.0:
            raise ValueError("factor must lie in (0, 1)")
        self.optimizer = optimizer
        self.patience = patience
        self.factor = factor
        self.best = -np.inf
        self.num_bad_epochs = 0

    def step(self, metric: float, epoch: int = 0) -> bool:
        """Record an epoch's metric.

        Returns:
            True if the metric is a new best.
        """
        if metric > self.best:
            self.best = metric
            self.num_bad_epochs = 0
            return True

        self.num_bad_epochs += 1
        if self.num_bad_epochs >= self.patience:
            old_lr = self.optimizer.lr
            self.optimizer.lr = old_lr * self.factor
            self.num_bad_epochs = 0
            logger.info("Epoch %d: reducing learning rate to %.4e", epoch, self.optimizer.lr)
        return False
