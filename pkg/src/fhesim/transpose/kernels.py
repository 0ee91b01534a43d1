"""In-place recursive transpose of a row-major ``E x E`` matrix.

At each level the off-diagonal quadrants B and C are exchanged, then all four
quadrants are transposed recursively.  The ``2 x 2`` base case is the same
exchange with ``1 x 1`` blocks: index ``i`` moves to ``2*i mod 3`` (``i = 3``
stays put).  Every element move is charged to a TU level from the source and
destination addresses: different bank -> 3, same bank but different sub-array
-> 2, same sub-array -> 1.
"""
from __future__ import annotations

import numpy as np

from .._backend import njit, pick


@njit(inline="always")
def _level(src, dst, per_bank, per_sub):
    if src // per_bank != dst // per_bank:
        return 3
    if src // per_sub != dst // per_sub:
        return 2
    return 1


@njit
def transpose_nb(data, side, per_bank, per_sub, counts):
    # explicit DFS stack of (row0, col0, size)
    stack = np.empty((64 * 4, 3), np.int64)
    top = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = side
    top = 1
    while top > 0:
        top -= 1
        r0 = stack[top, 0]
        c0 = stack[top, 1]
        size = stack[top, 2]
        h = size // 2
        for x in range(h):
            for y in range(h):
                b = (r0 + x) * side + c0 + h + y
                c = (r0 + h + x) * side + c0 + y
                tmp = data[b]
                data[b] = data[c]
                data[c] = tmp
                lv = _level(b, c, per_bank, per_sub)
                counts[lv] += 2
        if h > 1:
            for qr in range(2):
                for qc in range(2):
                    stack[top, 0] = r0 + qr * h
                    stack[top, 1] = c0 + qc * h
                    stack[top, 2] = h
                    top += 1


def transpose_np(data, side, per_bank, per_sub, counts):
    """Level-synchronous variant: all quadrant exchanges of one recursion depth at once."""
    h = side // 2
    while h >= 1:
        origins = np.arange(0, side, 2 * h)
        r0, c0 = np.meshgrid(origins, origins, indexing="ij")
        x, y = np.meshgrid(np.arange(h), np.arange(h), indexing="ij")
        rr = r0.reshape(-1, 1) + x.reshape(1, -1)
        cc = c0.reshape(-1, 1) + y.reshape(1, -1)
        b = (rr * side + cc + h).ravel()
        c = ((rr + h) * side + cc).ravel()
        tmp = data[b].copy()
        data[b] = data[c]
        data[c] = tmp
        bank_diff = (b // per_bank) != (c // per_bank)
        sub_diff = (b // per_sub) != (c // per_sub)
        counts[3] += 2 * int(np.count_nonzero(bank_diff))
        counts[2] += 2 * int(np.count_nonzero(sub_diff & ~bank_diff))
        counts[1] += 2 * int(np.count_nonzero(~sub_diff))
        h //= 2


_transpose_word = pick(transpose_nb, transpose_np)


def transpose_inplace(data: np.ndarray, side: int, per_bank: int, per_sub: int, counts: np.ndarray) -> None:
    if data.dtype == object:
        transpose_np(data, side, per_bank, per_sub, counts)
    else:
        _transpose_word(data, side, per_bank, per_sub, counts)
