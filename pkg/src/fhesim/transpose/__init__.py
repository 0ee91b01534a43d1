"""Recursive in-SPM matrix transpose with per-level TU traffic accounting.

Placement rule: an ``E x E`` matrix is striped across ``bank_count`` banks in
address order (``E*E / bank_count`` consecutive elements per bank, at least
one), and each bank is split evenly into ``subarrays_per_bank`` sub-arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import transpose_inplace

__all__ = [
    "MatrixView",
    "TrafficReport",
    "TuHierarchy",
    "base_case_permutation",
    "transpose_naive",
    "transpose_recursive",
]


def _is_pow2(x: int) -> bool:
    return x >= 1 and not x & (x - 1)


class MatrixView:
    """Row-major ``E x E`` view: element ``[r, c]`` sits at address ``E*r + c``."""

    def __init__(self, backing, side: int):
        arr = np.asarray(backing)
        if arr.ndim != 1 or arr.size != side * side:
            raise ValueError(f"backing must be a flat vector of {side * side} elements")
        self.backing = arr
        self.side = side

    def __getitem__(self, idx):
        r, c = idx
        return self.backing[self.side * r + c]

    def as_2d(self) -> np.ndarray:
        return self.backing.reshape(self.side, self.side)

    def copy(self) -> "MatrixView":
        return MatrixView(self.backing.copy(), self.side)


@dataclass(frozen=True)
class TrafficReport:
    level1: int
    level2: int
    level3: int

    @property
    def total_moves(self) -> int:
        return self.level1 + self.level2 + self.level3


@dataclass
class TuHierarchy:
    """Three TU levels: per-sub-array, per-bank and the shared inter-bank TU."""

    bank_count: int = 512
    subarrays_per_bank: int = 4
    counters: np.ndarray = field(default_factory=lambda: np.zeros(4, np.int64))

    levels = 3

    def __post_init__(self):
        if self.bank_count < 1 or self.subarrays_per_bank < 1:
            raise ValueError("bank_count and subarrays_per_bank must be positive")

    def placement(self, side: int) -> tuple[int, int]:
        """Elements per bank and per sub-array for an ``side x side`` matrix."""
        per_bank = max(1, side * side // self.bank_count)
        per_sub = max(1, per_bank // self.subarrays_per_bank)
        # keep sub-arrays nested inside banks
        per_bank = max(per_bank, per_sub)
        per_bank -= per_bank % per_sub
        return per_bank, per_sub

    @property
    def level_moves(self) -> tuple[int, int, int]:
        return int(self.counters[1]), int(self.counters[2]), int(self.counters[3])

    def report(self) -> TrafficReport:
        return TrafficReport(*self.level_moves)


def base_case_permutation(i: int) -> int:
    """New index of element ``i`` in a transposed ``2 x 2`` block."""
    if not 0 <= i <= 3:
        raise ValueError("2x2 index must be in 0..3")
    return 3 if i == 3 else (2 * i) % 3


def transpose_recursive(m: MatrixView, tu: TuHierarchy | None = None) -> tuple[MatrixView, TrafficReport]:
    """Transpose ``m`` in place; return it with the moves this call generated."""
    side = m.side
    if side < 2 or not _is_pow2(side):
        raise ValueError(f"side must be a power of two >= 2, got {side}")
    if tu is None:
        tu = TuHierarchy()
    per_bank, per_sub = tu.placement(side)
    counts = np.zeros(4, np.int64)
    data = m.backing
    if not data.flags.c_contiguous:
        raise ValueError("backing must be contiguous")
    transpose_inplace(data, side, per_bank, per_sub, counts)
    tu.counters += counts
    return m, TrafficReport(int(counts[1]), int(counts[2]), int(counts[3]))


def transpose_naive(m: MatrixView) -> MatrixView:
    """Out-of-place oracle: direct ``[n, m] -> [m, n]`` addressing."""
    side = m.side
    out = np.empty_like(m.backing)
    for r in range(side):
        for c in range(side):
            out[side * c + r] = m.backing[side * r + c]
    return MatrixView(out, side)
