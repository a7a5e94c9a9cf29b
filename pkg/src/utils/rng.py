"""Deterministic counter-based random generators."""

import hashlib

import numpy as np

UINT64_MAX = 2**64 - 1


def make_rng(seed: int) -> np.random.Generator:
    """Create a Philox-backed generator keyed by ``seed``.

    Every caller gets its own stream; nothing touches global RNG state.
    """
    return np.random.Generator(np.random.Philox(key=int(seed) & UINT64_MAX))


def derive_seed(seed: int, *labels: object) -> int:
    """Derive a 64-bit sub-seed from a parent seed and labels."""
    digest = hashlib.blake2b(digest_size=8)
    digest.update(int(seed).to_bytes(8, "little", signed=False))
    for label in labels:
        digest.update(b"\x1f")
        digest.update(str(label).encode("utf-8"))
    return int.from_bytes(digest.digest(), "little")


def draw_seed(rng: np.random.Generator) -> int:
    """Draw a fresh 64-bit seed from ``rng``."""
    return int(rng.integers(0, UINT64_MAX, dtype=np.uint64, endpoint=True))
