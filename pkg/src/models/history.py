"""Training history data classes."""

from dataclasses import asdict, dataclass, field
from typing import Any

from .ranker import RankerModel


@dataclass(frozen=True)
class EpochRecord:
    """Outcome of one training epoch.

    Attributes:
        epoch: 1-based epoch number.
        loss: Mean hinge loss over the epoch's pairs.
        val_accuracy: Pairwise validation accuracy after the epoch.
        lr: Learning rate used during the epoch.
        improved: Whether this epoch set a new best validation accuracy.
    """

    epoch: int
    loss: float
    val_accuracy: float
    lr: float
    improved: bool = False

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class TrainingResult:
    """Best model of a training run plus its full history.

    Attributes:
        model: Snapshot with the best validation accuracy (float32-exact).
        history: Per-epoch records.
        best_epoch: Epoch the snapshot was taken after.
        best_accuracy: Validation accuracy of the snapshot.
    """

    model: RankerModel
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_accuracy: float = 0.0

    @property
    def learning_rates(self) -> list[float]:
        return [record.lr for record in self.history]

    @property
    def losses(self) -> list[float]:
        return [record.loss for record in self.history]
