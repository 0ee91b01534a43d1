"""Randomness for key generation and encryption.

Secure mode draws every byte from ``os.urandom``.  Seeded mode draws from a
numpy PCG64 stream and exists only for reproducible tests.
"""
from __future__ import annotations

import math
import os

import numpy as np

from ..census import record


class FheRng:
    def __init__(self, seed: int | None = None):
        self.seed = seed
        self._gen = None if seed is None else np.random.Generator(np.random.PCG64(seed))

    @property
    def secure(self) -> bool:
        return self._gen is None

    def bytes(self, n: int) -> bytes:
        return os.urandom(n) if self._gen is None else self._gen.bytes(n)

    def words(self, n: int) -> np.ndarray:
        return np.frombuffer(self.bytes(8 * n), dtype="<u8").astype(np.uint64)

    def unit_floats(self, n: int) -> np.ndarray:
        """Uniform floats in ``[0, 1)`` with 53 random bits each."""
        return (self.words(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform_below(self, q: int, n: int) -> np.ndarray:
        """``n`` uniform integers in ``[0, q)`` by masked rejection."""
        bits = (q - 1).bit_length()
        if bits <= 63:
            out = np.empty(n, np.uint64)
            filled = 0
            shift = np.uint64(64 - max(bits, 1))
            qq = np.uint64(q)
            while filled < n:
                cand = self.words(max(16, 2 * (n - filled))) >> shift
                cand = cand[cand < qq][: n - filled]
                out[filled:filled + cand.size] = cand
                filled += cand.size
            return out
        nbytes = (bits + 7) // 8
        mask = (1 << bits) - 1
        vals = []
        while len(vals) < n:
            v = int.from_bytes(self.bytes(nbytes), "little") & mask
            if v < q:
                vals.append(v)
        out = np.empty(n, dtype=object)
        out[:] = vals
        return out

    def ternary(self, n: int) -> np.ndarray:
        """Coefficients uniform over ``{-1, 0, 1}``."""
        record("sample")
        return (self.uniform_below(3, n).astype(np.int64) - 1)

    def gaussian(self, sigma: float, n: int) -> np.ndarray:
        """Centered discrete Gaussian on the integers, tail-cut at 6 sigma."""
        record("sample")
        if sigma <= 0:
            return np.zeros(n, np.int64)
        tail = int(math.ceil(6 * sigma))
        out = np.empty(n, np.int64)
        filled = 0
        while filled < n:
            m = max(32, 2 * (n - filled))
            x = self.uniform_below(2 * tail + 1, m).astype(np.int64) - tail
            u = self.unit_floats(m)
            keep = x[u < np.exp(-(x.astype(np.float64) ** 2) / (2 * sigma * sigma))][: n - filled]
            out[filled:filled + keep.size] = keep
            filled += keep.size
        return out
