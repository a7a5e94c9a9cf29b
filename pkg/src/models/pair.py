"""RankedPair data class for training pairs."""

from dataclasses import dataclass, field
from typing import Any, Optional

from .distortion import DistortionSpec

DISTORTION_CLASSES = (1, 2)
PAIR_CLASSES = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class RankedPair:
    """An (image+, image-) pair where image+ is of higher quality by construction.

    Attributes:
        pos_id: Record id of the positive image.
        neg_id: Record id of the negative image, or the content address of a
            distorted copy for classes 1-2.
        class_id: Sampling class 1..6.
        neg_distortions: Distortion chain deriving the negative from the positive
            (classes 1-2 only).
        pos_path: Path of the positive image, filled in when materialized.
        neg_path: Path of the negative image, filled in when materialized.
    """

    pos_id: str
    neg_id: str
    class_id: int
    neg_distortions: Optional[tuple[DistortionSpec, ...]] = None
    pos_path: str = ""
    neg_path: str = ""

    pos_label: int = field(default=1, init=False, repr=False)
    neg_label: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        """Validate class membership of the distortion chain."""
        if self.class_id not in PAIR_CLASSES:
            raise ValueError(f"class_id must be in 1..6, got {self.class_id}")
        if self.is_distortion_pair:
            if not self.neg_distortions:
                raise ValueError(f"class {self.class_id} pairs need a distortion chain")
        elif self.neg_distortions is not None:
            raise ValueError(f"class {self.class_id} pairs take no distortion chain")
        if self.pos_id == self.neg_id:
            raise ValueError(f"pair uses the same image on both sides: {self.pos_id}")

    @property
    def is_distortion_pair(self) -> bool:
        """Whether the negative is a distorted copy of the positive."""
        return self.class_id in DISTORTION_CLASSES

    def to_dict(self) -> dict[str, Any]:
        """Serialize to a pair file line."""
        return {
            "pos_id": self.pos_id,
            "neg_id": self.neg_id,
            "pos_path": self.pos_path,
            "neg_path": self.neg_path,
            "class_id": self.class_id,
            "neg_distortions": (
                [spec.to_dict() for spec in self.neg_distortions]
                if self.neg_distortions
                else None
            ),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RankedPair":
        """Parse a pair file line."""
        chain = data.get("neg_distortions")
        return cls(
            pos_id=str(data["pos_id"]),
            neg_id=str(data["neg_id"]),
            class_id=int(data["class_id"]),
            neg_distortions=(
                tuple(DistortionSpec.from_dict(d) for d in chain) if chain else None
            ),
            pos_path=str(data.get("pos_path", "")),
            neg_path=str(data.get("neg_path", "")),
        )
