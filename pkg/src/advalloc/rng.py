"""Deterministic random streams derived from a master seed plus a label.

Every run entry point owns one 64-bit seed; subsystems get independent
generators keyed by purpose strings, so adding a consumer never shifts the
draws of another. The label is folded through SHA-256 into a spawn key,
which keeps streams statistically independent for any label set.
"""
from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_rng(seed: int, label: str) -> np.random.Generator:
    """Generator for (seed, label); same pair always yields the same stream."""
    if not isinstance(label, str) or not label:
        raise ValueError("label must be a non-empty string")
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    spawn_key = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    seq = np.random.SeedSequence(entropy=int(seed) & MASK64, spawn_key=spawn_key)
    return np.random.default_rng(seq)
