"""Deterministic pseudo-randomness for property suites.

The generator is SplitMix64 (Steele, Lea, Flood 2014): a 64-bit counter
advanced by the golden-gamma constant and finalized with two xor-shift
multiplies.  It is tiny, platform independent, and splittable, which is
what the seeded self-test runner needs: identical seeds must produce
byte-identical reports everywhere, and independent suites draw from
independent child streams.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Seeded 64-bit stream with uniform/normal/complex helpers."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def split(self) -> "SplitMix64":
        """Independent child stream (seeded from this stream)."""
        return SplitMix64(self.next_u64())

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        # 53-bit mantissa in [0, 1)
        u = self.next_u64() >> 11
        return lo + (hi - lo) * (u * (1.0 / (1 << 53)))

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi]."""
        if hi < lo:
            raise ValueError("empty range")
        span = hi - lo + 1
        # rejection sampling keeps the distribution exactly uniform
        limit = (_MASK + 1) - ((_MASK + 1) % span)
        while True:
            u = self.next_u64()
            if u < limit:
                return lo + (u % span)

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]

    def normal(self) -> float:
        # Box-Muller; u1 bounded away from 0
        u1 = max(self.uniform(), 1e-300)
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def complex_normal(self) -> complex:
        return complex(self.normal(), self.normal())

    def complex_matrix(self, rows: int, cols: int) -> np.ndarray:
        data = [self.complex_normal() for _ in range(rows * cols)]
        return np.array(data, dtype=np.complex128).reshape(rows, cols)

    def unitary(self, n: int) -> np.ndarray:
        """Haar-ish random unitary via QR of a complex Gaussian matrix."""
        if n == 0:
            return np.zeros((0, 0), dtype=np.complex128)
        q, r = np.linalg.qr(self.complex_matrix(n, n))
        # fix phases so the factorization is unique
        d = np.diagonal(r)
        phases = d / np.abs(np.where(np.abs(d) < 1e-300, 1.0, d))
        return q * phases
