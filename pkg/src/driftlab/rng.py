"""Deterministic random-stream derivation shared by every module.

All randomness in driftlab flows from a single user-supplied integer seed
through :func:`derive_rng`. A stream is named by a path of labels such as
``("split", "test", 3)``; the labels are folded through SHA-256 into a
numpy ``SeedSequence``, so identical ``(seed, labels)`` reproduce the same
PCG64 stream on any platform, at any worker-pool size, in any call order.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_seed_sequence", "derive_rng"]


def _fold(label: object) -> int:
    digest = hashlib.sha256(repr(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed_sequence(seed: int, *labels: object) -> np.random.SeedSequence:
    """SeedSequence of the stream named by ``labels`` under ``seed``."""
    return np.random.SeedSequence([int(seed)] + [_fold(lab) for lab in labels])


def derive_rng(seed: int, *labels: object) -> np.random.Generator:
    """PCG64 generator for the stream named by ``labels`` under ``seed``."""
    return np.random.default_rng(derive_seed_sequence(seed, *labels))
