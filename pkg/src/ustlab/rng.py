"""Reproducible random number streams.

Python-level sampling uses counter-based Philox generators keyed by
(seed, *stream key).  Compiled kernels carry their own splitmix64 state;
per-replicate kernel seeds are derived by hashing (seed, key, replicate)
so replicate ``i`` gets the same stream regardless of how replicates are
partitioned across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "kernel_seed", "spawn_kernel_seeds", "mix64"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the given seed and stream key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed,) + key)))


def mix64(x: np.ndarray | int) -> np.ndarray | np.uint64:
    """splitmix64 finalizer; bijective on 64-bit integers."""
    with np.errstate(over="ignore"):
        z = np.uint64(x) + _GOLDEN if np.isscalar(x) else x.astype(np.uint64) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return z


def kernel_seed(seed: int, *key: int) -> int:
    """Nonzero 64-bit seed for a compiled kernel, hashed from (seed, key)."""
    z = mix64(np.uint64(seed & (2**64 - 1)))
    for k in key:
        with np.errstate(over="ignore"):
            z = mix64(z ^ mix64(np.uint64(k & (2**64 - 1))))
    return int(z) or 1


def spawn_kernel_seeds(seed: int, n: int, *key: int) -> np.ndarray:
    """Per-replicate kernel seeds; replicate i's seed does not depend on n."""
    base = np.uint64(kernel_seed(seed, *key))
    idx = np.arange(n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        out = mix64(base ^ mix64(idx))
    out[out == 0] = 1
    return out
