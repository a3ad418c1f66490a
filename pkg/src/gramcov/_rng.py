"""Seeded generators. PCG64 streams derived through ``SeedSequence``."""

from __future__ import annotations

import numpy as np


def make_rng(seed, *key: int) -> np.random.Generator:
    """PCG64 generator for ``seed``; extra ``key`` integers select an independent child stream."""
    seq = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))
