"""Ranked training pair sampling and materialization.

Six pair classes, each a (positive set, negative set) row:

    1. studio        > distorted copy of itself
    2. good UGC      > distorted copy of itself
    3. studio        > good UGC
    4. studio        > bad UGC
    5. good UGC      > bad UGC, both with a person visible
    6. good UGC      > bad UGC, both without a person
"""

import logging
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from src.models import (
    Bucket,
    ImageRecord,
    Manifest,
    MaterializeResult,
    NoPairDataError,
    PairConfig,
    PairDropError,
    RankedPair,
    RankerError,
)
from src.services.corpus import resolve_path
from src.services.distortion import distort_chain, sample_chain
from src.services.exporter import content_address, generate_output_path, save_image
from src.services.loader import load_image
from src.utils.jsonl import read_jsonl, write_jsonl
from src.utils.parallel import parallel_map
from src.utils.rng import draw_seed, make_rng

logger = logging.getLogger(__name__)

PAIR_FILE_NAME = "pairs.jsonl"
DISTORTED_DIR = "distorted"
MAX_DROP_RATIO = 0.10


@dataclass(frozen=True)
class PairRow:
    """Eligible positives and negatives of one pair class."""

    class_id: int
    positives: tuple[ImageRecord, ...]
    negatives: tuple[ImageRecord, ...]

    @property
    def is_empty(self) -> bool:
        return not self.positives or not self.negatives


def eligible_sets(manifest: Manifest) -> list[PairRow]:
    """Build the six (positive, negative) record rows.

    Rows 1-2 list the same records on both sides (negatives are distorted
    copies). Records with unknown ``has_human`` are excluded from rows 5-6 only.

    Args:
        manifest: Training manifest.

    Returns:
        Rows for classes 1..6, possibly empty.
    """
    by_bucket: dict[Bucket, list[ImageRecord]] = {b: [] for b in Bucket}
    for record in manifest.records:
        by_bucket[record.bucket].append(record)

    studio = tuple(by_bucket[Bucket.STUDIO])
    good = tuple(by_bucket[Bucket.UGC_GOOD])
    bad = tuple(by_bucket[Bucket.UGC_BAD])

    def flagged(records: tuple[ImageRecord, ...], value: bool) -> tuple[ImageRecord, ...]:
        return tuple(r for r in records if r.has_human is value)

    rows = [
        PairRow(1, studio, studio),
        PairRow(2, good, good),
        PairRow(3, studio, good),
        PairRow(4, studio, bad),
        PairRow(5, flagged(good, True), flagged(bad, True)),
        PairRow(6, flagged(good, False), flagged(bad, False)),
    ]
    for row in rows:
        logger.debug(
            "Class %d: %d positives, %d negatives",
            row.class_id,
            len(row.positives),
            len(row.negatives),
        )
    return rows


def class_probabilities(rows: list[PairRow], weights: tuple[float, ...]) -> np.ndarray:
    """Class weights restricted to non-empty rows, renormalized.

    Raises:
        NoPairDataError: If every row is empty, or every weighted row is.
    """
    probs = np.array(weights, dtype=np.float64)
    for row in rows:
        if row.is_empty:
            if probs[row.class_id - 1] > 0:
                logger.warning(
                    "Pair class %d has weight %.3f but no eligible images; renormalizing",
                    row.class_id,
                    probs[row.class_id - 1],
                )
            probs[row.class_id - 1] = 0.0

    if all(row.is_empty for row in rows):
        raise NoPairDataError()
    if probs.sum() <= 0:
        raise NoPairDataError("every class with a positive weight is empty")
    return probs / probs.sum()


def build_pairs(manifest: Manifest, cfg: PairConfig) -> list[RankedPair]:
    """Sample exactly ``cfg.n_pairs`` ranked pairs.

    Classes are drawn by weight, positives uniformly within the class row, and
    negatives uniformly from the row's negative set (classes 3-6) or as a
    distortion chain of length 1..chain_max over the positive (classes 1-2).
    Sampling is with replacement and fully determined by (manifest, cfg).

    Raises:
        NoPairDataError: If no class has eligible images.
    """
    rows = eligible_sets(manifest)
    probs = class_probabilities(rows, cfg.class_weights)
    rng = make_rng(cfg.seed)

    pairs = []
    class_draws = rng.choice(len(rows), size=cfg.n_pairs, p=probs)
    for class_index in class_draws:
        row = rows[int(class_index)]
        pos = row.positives[int(rng.integers(len(row.positives)))]
        if row.class_id in (1, 2):
            chain = sample_chain(draw_seed(rng), cfg.chain_max)
            pairs.append(
                RankedPair(
                    pos_id=pos.id,
                    neg_id=content_address(pos.id, chain),
                    class_id=row.class_id,
                    neg_distortions=chain,
                )
            )
        else:
            neg = row.negatives[int(rng.integers(len(row.negatives)))]
            pairs.append(RankedPair(pos_id=pos.id, neg_id=neg.id, class_id=row.class_id))

    logger.info("Sampled %d pairs: %s", len(pairs), dict(sorted(class_counts(pairs).items())))
    return pairs


def class_counts(pairs: list[RankedPair]) -> Counter:
    """Number of pairs per class id."""
    return Counter(pair.class_id for pair in pairs)


def materialize(
    pairs: list[RankedPair],
    manifest: Manifest,
    image_root: Optional[str | Path],
    out_dir: str | Path,
    threads: Optional[int] = None,
    show_progress: bool = False,
) -> MaterializeResult:
    """Write distorted negatives and the pair file.

    Distorted images are written losslessly under ``out_dir/distorted`` with
    content-addressed names; existing files are not rewritten, so re-running is
    idempotent. A pair whose image cannot be decoded is dropped and recorded.

    Raises:
        PairDropError: If more than 10% of the pairs were dropped (the pair file
            is still written).
    """
    out_dir = Path(out_dir)
    distorted_dir = out_dir / DISTORTED_DIR
    distorted_dir.mkdir(parents=True, exist_ok=True)

    def work(item: tuple[int, RankedPair]) -> tuple[Optional[RankedPair], bool, Optional[str]]:
        index, pair = item
        try:
            return _materialize_one(pair, manifest, image_root, distorted_dir)
        except RankerError as e:
            logger.warning("Pair %d dropped: %s", index, e.message)
            return None, False, e.message

    outcomes = parallel_map(
        work, list(enumerate(pairs)), threads, desc="materialize", show_progress=show_progress
    )

    result = MaterializeResult(pair_file=str(out_dir / PAIR_FILE_NAME))
    for index, (pair, written, error) in enumerate(outcomes):
        if pair is None:
            result.errors.append((index, error or "unknown error"))
            continue
        result.pairs.append(pair)
        result.files_written += int(written)

    write_pair_file(result.pair_file, result.pairs)
    logger.info(
        "Materialized %d pairs (%d new images, %d dropped)",
        len(result.pairs),
        result.files_written,
        len(result.errors),
    )
    if result.drop_ratio > MAX_DROP_RATIO:
        raise PairDropError(len(result.errors), result.total)
    return result


def _materialize_one(
    pair: RankedPair,
    manifest: Manifest,
    image_root: Optional[str | Path],
    distorted_dir: Path,
) -> tuple[RankedPair, bool, None]:
    pos_record = manifest.get(pair.pos_id)
    pos_path = resolve_path(pos_record, image_root)

    if not pair.is_distortion_pair:
        neg_path = resolve_path(manifest.get(pair.neg_id), image_root)
        # decodability check only; nothing is written for classes 3-6
        load_image(pos_path)
        load_image(neg_path)
        return replace(pair, pos_path=str(pos_path), neg_path=str(neg_path)), False, None

    neg_path = generate_output_path(distorted_dir, pair.neg_id)
    written = False
    if not neg_path.exists():
        source = load_image(pos_path)
        distorted = distort_chain(source, pair.neg_distortions, chain_max=len(pair.neg_distortions))
        save_image(distorted, neg_path)
        written = True
    return replace(pair, pos_path=str(pos_path), neg_path=str(neg_path)), written, None


def replay_negative(
    pair: RankedPair, manifest: Manifest, image_root: Optional[str | Path]
) -> np.ndarray:
    """Re-derive a class 1-2 negative from its recorded chain, as 8-bit pixels."""
    if not pair.is_distortion_pair:
        raise ValueError(f"class {pair.class_id} pairs have no distortion chain")
    source = load_image(resolve_path(manifest.get(pair.pos_id), image_root))
    chain = pair.neg_distortions
    return distort_chain(source, chain, chain_max=len(chain)).to_uint8()


def write_pair_file(path: str | Path, pairs: list[RankedPair]) -> int:
    """Write one pair object per line."""
    return write_jsonl(path, (pair.to_dict() for pair in pairs))


def read_pair_file(path: str | Path) -> list[RankedPair]:
    """Read a pair file written by :func:`write_pair_file`."""
    return [RankedPair.from_dict(data) for data in read_jsonl(path)]
