"""ImageRecord and Manifest data classes for the image corpus."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional


class Bucket(Enum):
    """Quality class of a corpus image."""

    STUDIO = "studio"
    UGC_GOOD = "ugc_good"
    UGC_BAD = "ugc_bad"


class Split(Enum):
    """Dataset split an image belongs to."""

    TRAIN = "train"
    VAL = "val"
    TEST = "test"


RECORD_FIELDS = (
    "id",
    "path",
    "bucket",
    "style_id",
    "has_human",
    "upvotes",
    "downvotes",
    "split",
)


@dataclass(frozen=True)
class ImageRecord:
    """One corpus image.

    Attributes:
        id: Unique identifier within a manifest.
        path: Filesystem path to an RGB-decodable image (may be relative to an image root).
        bucket: Quality bucket (studio, ugc_good, ugc_bad).
        style_id: Product grouping the image belongs to.
        has_human: Whether a person is visible; None when unknown.
        upvotes: Upvotes on the review carrying the image.
        downvotes: Downvotes on the review carrying the image.
        split: Dataset split.
    """

    id: str
    path: str
    bucket: Bucket
    style_id: str
    upvotes: int = 0
    downvotes: int = 0
    split: Split = Split.TRAIN
    has_human: Optional[bool] = None

    def __post_init__(self):
        """Validate vote counts."""
        if self.upvotes < 0 or self.downvotes < 0:
            raise ValueError(f"record {self.id}: vote counts must be >= 0")

    @property
    def engagement(self) -> int:
        """Total votes on the review."""
        return self.upvotes + self.downvotes

    def to_dict(self) -> dict[str, Any]:
        """Serialize to a manifest line object (has_human omitted when unknown)."""
        data: dict[str, Any] = {
            "id": self.id,
            "path": self.path,
            "bucket": self.bucket.value,
            "style_id": self.style_id,
            "upvotes": self.upvotes,
            "downvotes": self.downvotes,
            "split": self.split.value,
        }
        if self.has_human is not None:
            data["has_human"] = self.has_human
        return data


@dataclass(frozen=True)
class Manifest:
    """Ordered, immutable collection of image records.

    Attributes:
        records: Records in file order.
        source_uri: Where the manifest was loaded from.
        allow_shared_paths: Whether two records may reference the same file.
    """

    records: tuple[ImageRecord, ...] = ()
    source_uri: str = ""
    allow_shared_paths: bool = False
    _by_id: dict[str, ImageRecord] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._by_id:
            object.__setattr__(self, "_by_id", {r.id: r for r in self.records})

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._by_id

    def get(self, record_id: str) -> ImageRecord:
        """Look up a record by id."""
        return self._by_id[record_id]

    @property
    def ids(self) -> set[str]:
        """All record ids."""
        return set(self._by_id)

    def with_records(self, records: list[ImageRecord]) -> "Manifest":
        """Create a manifest from the same source holding only ``records``."""
        return Manifest(
            records=tuple(records),
            source_uri=self.source_uri,
            allow_shared_paths=self.allow_shared_paths,
        )
