"""Counter-based uniform RNG for reproducible Monte Carlo.

Walk-on-spheres needs per-walk substreams whose draws do not depend on how
walks are batched, so estimates equal the sequential reduction for a fixed
seed.  A hashed counter scheme (splitmix64 finalizer over (seed, stream,
counter)) gives that with plain vectorized uint64 arithmetic.
"""
from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (x + _GAMMA).astype(np.uint64)
        z ^= z >> np.uint64(30)
        z *= _M1
        z ^= z >> np.uint64(27)
        z *= _M2
        z ^= z >> np.uint64(31)
    return z


def uniform(seed: int, stream, counter) -> np.ndarray:
    """U(0,1) draw keyed by (seed, stream, counter); broadcasts its arguments."""
    s = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    st = np.asarray(stream, dtype=np.uint64)
    ct = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix(_mix(st * np.uint64(0x9E3779B97F4A7C15) + s) ^ ct)
        h = _mix(h + ct * _GAMMA)
    return (h >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def uniform_angles(seed: int, stream, counter) -> np.ndarray:
    return 2.0 * np.pi * uniform(seed, stream, counter)
