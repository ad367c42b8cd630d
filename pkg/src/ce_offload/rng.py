"""Deterministic seed derivation and counter-based uniform streams.

Every random draw in this package is a pure function of a 64-bit base seed
plus a path of integer indices (trial number, iteration, sample index, ...).
Substreams derived for different paths are independent, so work items can be
evaluated in any order, or in parallel, and still reproduce the sequential
results bit-exactly.
"""

from __future__ import annotations

import random

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit integer."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_key(seed: int, *path: int) -> int:
    """Map (seed, index path) to a substream key; distinct paths collide only
    with negligible (2^-64 scale) probability."""
    key = mix64((seed & _MASK64) ^ _GOLDEN)
    for part in path:
        key = mix64((key + _GOLDEN) ^ (part & _MASK64))
    return key


def substream_rng(seed: int, *path: int) -> random.Random:
    """A stdlib Random seeded from the derived substream key."""
    return random.Random(derive_key(seed, *path))


_U64_GOLDEN = np.uint64(_GOLDEN)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 1.0 / float(1 << 53)


def uniform_block(key: int, count: int) -> np.ndarray:
    """`count` uniforms in [0, 1) from the substream `key`, vectorized.

    Draw d is mix64(key + (d+1) * golden); the stream is counter-based, so
    any draw can be regenerated without the ones before it.
    """
    counters = np.uint64(key) + np.arange(1, count + 1, dtype=np.uint64) * _U64_GOLDEN
    return _finalize(counters)


def uniform_matrix(keys, count: int) -> np.ndarray:
    """Row s holds `count` uniforms from substream `keys[s]`; shape
    (len(keys), count). Equivalent to stacking uniform_block per key."""
    keys = np.asarray(keys, dtype=np.uint64)
    steps = np.arange(1, count + 1, dtype=np.uint64) * _U64_GOLDEN
    return _finalize(keys[:, None] + steps[None, :])


def _finalize(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    x = x ^ (x >> np.uint64(31))
    return (x >> np.uint64(11)).astype(np.float64) * _TO_UNIT
