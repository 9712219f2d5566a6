"""Deterministic random number generation used everywhere seeds appear.

All seeded behavior in this package (embedder weights, k-means init,
synthetic test data) runs through SplitMix64 rather than a library
generator, so that identical seeds produce bit-identical streams on any
platform and any numpy version.

SplitMix64 (Steele, Lea & Flood's mixer, public domain): the n-th output
is ``mix(seed + (n + 1) * GOLDEN)`` with

    mix(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
            z ^= z >> 27; z *= 0x94D049BB133111EB
            z ^= z >> 31

all in modular 64-bit arithmetic. Floats are drawn as the top 53 bits of
an output scaled by 2**-53, giving uniforms in [0, 1).
"""

from __future__ import annotations

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Counter-based SplitMix64 stream.

    The counter form (state = seed + n * GOLDEN) lets bulk draws be
    vectorized in numpy while producing exactly the same stream as
    repeated scalar calls.
    """

    def __init__(self, seed: int):
        self._seed = seed & _MASK
        self._count = 0

    def next_uint64(self) -> int:
        self._count += 1
        return _mix((self._seed + self._count * _GOLDEN) & _MASK)

    def next_float(self) -> float:
        """Uniform float64 in [0, 1)."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def uint64(self, n: int) -> np.ndarray:
        """Next n raw outputs as a uint64 array (vectorized, same stream)."""
        counts = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        with np.errstate(over="ignore"):
            z = (np.uint64(self._seed) + counts * np.uint64(_GOLDEN))
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            return z ^ (z >> np.uint64(31))

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """n uniform float64 draws in [low, high)."""
        u = (self.uint64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return low + u * (high - low)

    def normal(self, n: int) -> np.ndarray:
        """n standard normal draws via Box-Muller on consecutive uniform pairs."""
        m = (n + 1) // 2
        u1 = np.maximum(self.uniform(m), 2.0**-53)
        u2 = self.uniform(m)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * m, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def sample(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), via partial Fisher-Yates.

        Modulo reduction is intentionally used for the draw: the slight
        bias is irrelevant here and keeping the arithmetic trivial keeps
        the stream reproducible from the documented algorithm alone.
        """
        if k > n:
            raise ValueError(f"cannot sample {k} distinct items from {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.next_uint64() % (n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
