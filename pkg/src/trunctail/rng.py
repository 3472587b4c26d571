"""Seed handling.

All randomized operations accept a ``seed`` that may be an int, a
``numpy.random.SeedSequence`` or an already-built ``numpy.random.Generator``.
Replicated experiments derive one child seed per replicate index (never per
worker), so results are independent of how work is partitioned.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, None, np.random.SeedSequence, np.random.Generator]


def seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    """Coerce ``seed`` to a SeedSequence. Generators are not accepted here."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        raise TypeError("replicated operations need an int or SeedSequence seed, not a Generator")
    return np.random.SeedSequence(seed)


def child(seq: np.random.SeedSequence, index: int) -> np.random.SeedSequence:
    """Child seed for replicate ``index``; stable under any work partitioning."""
    return np.random.SeedSequence(entropy=seq.entropy, spawn_key=seq.spawn_key + (index,))


def generator(seed: SeedLike) -> np.random.Generator:
    """Coerce ``seed`` to a Generator (passed through unchanged if already one)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed_sequence(seed))


def seed_label(seed: SeedLike):
    """Representation of a seed suitable for provenance metadata."""
    if isinstance(seed, np.random.SeedSequence):
        if seed.spawn_key:
            return f"{seed.entropy}:{','.join(map(str, seed.spawn_key))}"
        return seed.entropy
    if isinstance(seed, np.random.Generator):
        return "generator"
    return seed
