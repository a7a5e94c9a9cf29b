"""PairConfig and TrainConfig data classes for pipeline configuration."""

from dataclasses import asdict, dataclass, field, fields
from typing import Any

N_CLASSES = 6


@dataclass
class PairConfig:
    """Configuration for ranked pair sampling.

    Attributes:
        n_pairs: Total number of pairs to sample.
        chain_max: Maximum number of stacked distortions on a class 1-2 negative.
        seed: Seed of the pair sampler.
        class_weights: Sampling weight of each of the six pair classes.
    """

    n_pairs: int = 1000
    chain_max: int = 2
    seed: int = 0
    class_weights: tuple[float, ...] = field(
        default_factory=lambda: (1.0 / N_CLASSES,) * N_CLASSES
    )

    def __post_init__(self):
        """Validate and normalize configuration values."""
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be >= 1")
        if self.chain_max < 1:
            raise ValueError("chain_max must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        weights = tuple(float(w) for w in self.class_weights)
        if len(weights) != N_CLASSES:
            raise ValueError(f"class_weights needs {N_CLASSES} entries, got {len(weights)}")
        if any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ValueError("class_weights must be >= 0 with a positive sum")
        total = sum(weights)
        self.class_weights = tuple(w / total for w in weights)

    @classmethod
    def distortion_heavy(cls, n_pairs: int, seed: int = 0) -> "PairConfig":
        """Weights dominated by the self-distortion classes 1 and 2."""
        return cls(
            n_pairs=n_pairs,
            seed=seed,
            class_weights=(0.35, 0.35, 0.1, 0.1, 0.05, 0.05),
        )


@dataclass
class TrainConfig:
    """Hyperparameters of the Siamese ranker.

    Attributes:
        margin: Minimal score gap required between positive and negative.
        lr: Initial ADAM learning rate.
        weight_decay: L2 coefficient added to the gradient.
        batch_size: Pairs per optimization step.
        max_epochs: Epoch budget.
        patience: Non-improving epochs before the learning rate is halved.
        lr_factor: Multiplier applied on plateau.
        beta1: ADAM first-moment decay.
        beta2: ADAM second-moment decay.
        eps: ADAM denominator guard.
        hidden: Hidden layer widths.
        seed: Seed for initialization and batch shuffling.
    """

    margin: float = 1.0
    lr: float = 1e-3
    weight_decay: float = 5e-4
    batch_size: int = 16
    max_epochs: int = 50
    patience: int = 5
    lr_factor: float = 0.5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    hidden: tuple[int, ...] = (512, 256, 128)
    seed: int = 0

    def __post_init__(self):
        """Validate configuration values."""
        if self.margin <= 0:
            raise ValueError("margin must be > 0")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ValueError("ADAM betas must lie in [0, 1)")
        if not self.hidden or any(width < 1 for width in self.hidden):
            raise ValueError("hidden widths must be >= 1")
        self.hidden = tuple(int(width) for width in self.hidden)


def config_from_dict(cls: type, data: dict[str, Any]):
    """Build a config dataclass from a mapping, ignoring unrelated keys."""
    names = {f.name for f in fields(cls)}
    kwargs = {k: v for k, v in data.items() if k in names and v is not None}
    for key in ("class_weights", "hidden"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    return cls(**kwargs)


def config_to_dict(config) -> dict[str, Any]:
    """JSON-friendly view of a config dataclass."""
    data = asdict(config)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in data.items()}
