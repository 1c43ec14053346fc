"""Counter-based random numbers, shared by the numba and numpy sampling backends.

Every random decision in the package is a pure function of (seed, replica,
stream, counter), so replicas can run in any order, in parallel, or on either
backend and still produce bit-identical output.  The generator is the
splitmix64 finalizer applied to an affine counter walk; the same constants are
used by the scalar, numpy-vectorized, and numba implementations.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB
INV53 = 1.0 / 9007199254740992.0  # 2**-53

# stream salts for derived generators (walk pair, bernoulli boundary coins)
STREAM_VERTEX = 0x1234567D
STREAM_WALK_H = 0x5B7E151628AED2A6
STREAM_WALK_V = 0x243F6A8885A308D3
STREAM_COINS = 0x452821E638D01377

# per-vertex counters pack x and y; lattices must stay below this extent
MAX_EXTENT = 1 << 20


def mix64(z: int) -> int:
    """Scalar splitmix64 finalizer (python ints, wrapped to 64 bits)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return z ^ (z >> 31)


def replica_key(seed: int, replica: int) -> int:
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    return mix64((seed * GOLDEN + replica * MIX_A) & MASK64)


def stream_key(key: int, salt: int) -> int:
    return mix64((key + salt) & MASK64)


def uniform(key: int, counter: int) -> float:
    """Uniform in [0, 1) for a given key and counter (scalar reference)."""
    return (mix64((key + GOLDEN * counter) & MASK64) >> 11) * INV53


def vertex_counter(x: int, y: int) -> int:
    return x + (y << 21)


def mix64_np(z: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer over uint64 arrays."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(MIX_A)
    z ^= z >> np.uint64(27)
    z *= np.uint64(MIX_B)
    z ^= z >> np.uint64(31)
    return z


def uniform_np(key: np.ndarray | int, counter: np.ndarray | int) -> np.ndarray:
    k = np.asarray(key, dtype=np.uint64)
    c = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = k + np.uint64(GOLDEN) * c
        out = mix64_np(state)
    return (out >> np.uint64(11)).astype(np.float64) * INV53


def replica_keys_np(seed: int, rep0: int, n: int) -> np.ndarray:
    reps = np.arange(rep0, rep0 + n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = np.uint64(seed) * np.uint64(GOLDEN) + reps * np.uint64(MIX_A)
        return mix64_np(state)
