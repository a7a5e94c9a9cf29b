"""Image manifest loading, proxy ground truth and split handling."""

import io
import json
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Any, TextIO

from src.models import (
    Bucket,
    ImageRecord,
    Manifest,
    ManifestParseError,
    ManifestValidationError,
    Split,
    UndefinedScoreError,
    ValTriple,
)
from src.models.record import RECORD_FIELDS
from src.utils.jsonl import dumps, iter_lines

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "path", "bucket", "style_id", "upvotes", "downvotes", "split")


def load_manifest(
    source: str | Path | TextIO,
    lenient: bool = False,
    allow_shared_paths: bool = False,
) -> Manifest:
    """Parse a line-delimited manifest.

    Args:
        source: Path to a manifest file, or an open text stream.
        lenient: Ignore unknown fields instead of rejecting them.
        allow_shared_paths: Allow several records to reference the same file.

    Returns:
        Manifest with records in file order.

    Raises:
        ManifestParseError: If a line is not a JSON object.
        ManifestValidationError: On duplicate ids, unknown bucket/split tokens,
            unknown fields (strict mode), bad vote counts or shared paths.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as handle:
            return load_manifest(handle, lenient, allow_shared_paths)

    source_uri = getattr(source, "name", "<stream>")
    records: list[ImageRecord] = []
    seen_ids: set[str] = set()
    seen_paths: dict[str, str] = {}

    for line_number, text in iter_lines(source):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ManifestParseError(line_number, str(e))
        if not isinstance(data, dict):
            raise ManifestParseError(line_number, "expected a JSON object")

        record = _parse_record(data, line_number, lenient)

        if record.id in seen_ids:
            raise ManifestValidationError(f"duplicate id '{record.id}'", line_number)
        seen_ids.add(record.id)

        if not allow_shared_paths:
            if record.path in seen_paths:
                raise ManifestValidationError(
                    f"path '{record.path}' already used by record '{seen_paths[record.path]}'",
                    line_number,
                )
            seen_paths[record.path] = record.id

        records.append(record)

    logger.debug("Loaded %d records from %s", len(records), source_uri)
    return Manifest(
        records=tuple(records),
        source_uri=str(source_uri),
        allow_shared_paths=allow_shared_paths,
    )


def loads_manifest(text: str, lenient: bool = False, allow_shared_paths: bool = False) -> Manifest:
    """Parse a manifest held in a string.

    The text holds records only, so a manifest that allows shared paths must
    be reloaded with ``allow_shared_paths=True``.
    """
    return load_manifest(io.StringIO(text), lenient=lenient, allow_shared_paths=allow_shared_paths)


def _parse_record(data: dict[str, Any], line_number: int, lenient: bool) -> ImageRecord:
    """Validate one line object and build its ImageRecord."""
    unknown = sorted(set(data) - set(RECORD_FIELDS))
    if unknown and not lenient:
        raise ManifestValidationError(f"unknown fields {unknown}", line_number)

    missing = [name for name in REQUIRED_FIELDS if name not in data]
    if missing:
        raise ManifestValidationError(f"missing fields {missing}", line_number)

    try:
        bucket = Bucket(data["bucket"])
    except ValueError:
        raise ManifestValidationError(f"unknown bucket '{data['bucket']}'", line_number)
    try:
        split = Split(data["split"])
    except ValueError:
        raise ManifestValidationError(f"unknown split '{data['split']}'", line_number)

    has_human = data.get("has_human")
    if has_human is not None and not isinstance(has_human, bool):
        raise ManifestValidationError("has_human must be a boolean or null", line_number)

    upvotes, downvotes = data["upvotes"], data["downvotes"]
    for name, value in (("upvotes", upvotes), ("downvotes", downvotes)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ManifestValidationError(f"{name} must be an integer >= 0", line_number)

    record_id, path = data["id"], data["path"]
    if not isinstance(record_id, str) or not record_id:
        raise ManifestValidationError("id must be a non-empty string", line_number)
    if not isinstance(path, str) or not path:
        raise ManifestValidationError("path must be a non-empty string", line_number)

    return ImageRecord(
        id=record_id,
        path=path,
        bucket=bucket,
        style_id=str(data["style_id"]),
        upvotes=upvotes,
        downvotes=downvotes,
        split=split,
        has_human=has_human,
    )


def serialize_manifest(manifest: Manifest) -> str:
    """Render a manifest as line-delimited text (inverse of load_manifest).

    Only records are written; ``allow_shared_paths`` is not part of the format.
    """
    return "".join(dumps(record.to_dict()) + "\n" for record in manifest.records)


def save_manifest(manifest: Manifest, path: str | Path) -> Path:
    """Write a manifest file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_manifest(manifest), encoding="utf-8")
    return path


def proxy_score(record: ImageRecord) -> float:
    """Engagement-derived quality score u / (u + d).

    Raises:
        UndefinedScoreError: If the record has no votes.
    """
    total = record.upvotes + record.downvotes
    if total == 0:
        raise UndefinedScoreError([record.id])
    return record.upvotes / total


def filter_split(manifest: Manifest, split: Split | str) -> Manifest:
    """Records of one split, order preserved."""
    split = Split(split)
    return manifest.with_records([r for r in manifest.records if r.split is split])


def require_scored(manifest: Manifest) -> None:
    """Reject a test set containing records without votes.

    Raises:
        UndefinedScoreError: Listing every record with u + d = 0.
    """
    missing = [r.id for r in manifest.records if r.engagement == 0]
    if missing:
        raise UndefinedScoreError(missing)


def group_by_style(manifest: Manifest) -> "OrderedDict[str, list[ImageRecord]]":
    """Records grouped by style, styles in order of first appearance."""
    groups: OrderedDict[str, list[ImageRecord]] = OrderedDict()
    for record in manifest.records:
        groups.setdefault(record.style_id, []).append(record)
    return groups


def build_val_triples(manifest: Manifest) -> list[ValTriple]:
    """One (studio, good UGC, bad UGC) triple per validation style.

    Takes the first record of each bucket in manifest order. Styles missing a
    bucket are skipped with a log message.
    """
    triples = []
    for style_id, records in group_by_style(filter_split(manifest, Split.VAL)).items():
        first: dict[Bucket, str] = {}
        for record in records:
            first.setdefault(record.bucket, record.id)
        if len(first) < len(Bucket):
            missing = sorted(b.value for b in Bucket if b not in first)
            logger.info("Validation style %s skipped: no %s image", style_id, "/".join(missing))
            continue
        triples.append(
            ValTriple(
                style_id=style_id,
                studio_id=first[Bucket.STUDIO],
                good_id=first[Bucket.UGC_GOOD],
                bad_id=first[Bucket.UGC_BAD],
            )
        )
    return triples


def resolve_path(record: ImageRecord, image_root: str | Path | None) -> Path:
    """Absolute location of a record's image."""
    path = Path(record.path)
    if path.is_absolute() or image_root is None:
        return path
    return Path(image_root) / path
