"""Labeled random streams derived from one master seed.

Every stochastic component of a run pulls its own generator through
``stream(master_seed, label)``.  Labels are hashed, so adding a new
consumer never shifts the draws seen by existing ones, which is what
makes whole runs byte-reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream(master_seed: int, label: str) -> np.random.Generator:
    """Return a generator keyed by ``(master_seed, label)``."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *words]))


def child_seed(master_seed: int, label: str) -> int:
    """A 31-bit integer seed derived from the labeled stream."""
    return int(stream(master_seed, label).integers(0, 2**31 - 1))
