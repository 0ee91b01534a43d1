"""Limb kernels for fixed-width unsigned integers.

Operands are ``(batch, limbs)`` arrays of ``uint32`` words, least-significant
limb first.  All intermediate arithmetic happens in ``uint64`` so a 32x32-bit
product plus two 32-bit addends never overflows.
"""
from __future__ import annotations

import numpy as np

from .._backend import njit, pick

LIMB_BITS = 32
LIMB_MASK = (1 << LIMB_BITS) - 1

_M = np.uint64(LIMB_MASK)
_S = np.uint64(LIMB_BITS)


@njit
def add_nb(a, b, out):
    rows, n = a.shape
    carry = np.zeros(rows, np.uint32)
    for r in range(rows):
        c = np.uint64(0)
        for i in range(n):
            s = np.uint64(a[r, i]) + np.uint64(b[r, i]) + c
            out[r, i] = np.uint32(s & _M)
            c = s >> _S
        carry[r] = np.uint32(c)
    return carry


def add_np(a, b, out):
    c = np.zeros(a.shape[0], np.uint64)
    for i in range(a.shape[1]):
        s = a[:, i].astype(np.uint64) + b[:, i] + c
        out[:, i] = s & _M
        c = s >> _S
    return c.astype(np.uint32)


@njit
def sub_nb(a, b, out):
    rows, n = a.shape
    borrow = np.zeros(rows, np.uint32)
    for r in range(rows):
        br = np.int64(0)
        for i in range(n):
            d = np.int64(a[r, i]) - np.int64(b[r, i]) - br
            if d < 0:
                d += np.int64(1) << np.int64(32)
                br = np.int64(1)
            else:
                br = np.int64(0)
            out[r, i] = np.uint32(d)
        borrow[r] = np.uint32(br)
    return borrow


def sub_np(a, b, out):
    br = np.zeros(a.shape[0], np.int64)
    for i in range(a.shape[1]):
        d = a[:, i].astype(np.int64) - b[:, i] - br
        neg = d < 0
        d[neg] += 1 << 32
        out[:, i] = d
        br = neg.astype(np.int64)
    return br.astype(np.uint32)


@njit
def mul_nb(a, b, out):
    """Schoolbook product; ``out`` has ``2 * limbs`` columns and is overwritten."""
    rows, n = a.shape
    for r in range(rows):
        for k in range(2 * n):
            out[r, k] = 0
        for i in range(n):
            ai = np.uint64(a[r, i])
            if ai == 0:
                continue
            c = np.uint64(0)
            for j in range(n):
                t = np.uint64(out[r, i + j]) + ai * np.uint64(b[r, j]) + c
                out[r, i + j] = np.uint32(t & _M)
                c = t >> _S
            out[r, i + n] = np.uint32(c)


def mul_np(a, b, out):
    n = a.shape[1]
    acc = np.zeros((a.shape[0], 2 * n), np.uint64)
    b64 = b.astype(np.uint64)
    for i in range(n):
        ai = a[:, i].astype(np.uint64)
        c = np.zeros(a.shape[0], np.uint64)
        for j in range(n):
            t = acc[:, i + j] + ai * b64[:, j] + c
            acc[:, i + j] = t & _M
            c = t >> _S
        acc[:, i + n] = c
    out[:] = acc


@njit
def redc_nb(t, q, qinv0, nwords, out):
    """Word-serial Montgomery reduction of each row of ``t``.

    ``t`` is consumed as scratch (it needs at least ``2 * nwords + 1`` limbs).
    Each outer step adds ``m * q`` aligned at word ``i`` so the low word
    clears; after ``nwords`` steps the value is divisible by ``2**(32*nwords)``.
    """
    rows, tl = t.shape
    qi0 = np.uint64(qinv0)
    for r in range(rows):
        for i in range(nwords):
            m = (np.uint64(t[r, i]) * qi0) & _M
            c = np.uint64(0)
            for j in range(nwords):
                s = np.uint64(t[r, i + j]) + m * np.uint64(q[j]) + c
                t[r, i + j] = np.uint32(s & _M)
                c = s >> _S
            k = i + nwords
            while c != 0 and k < tl:
                s = np.uint64(t[r, k]) + c
                t[r, k] = np.uint32(s & _M)
                c = s >> _S
                k += 1
        # u = t >> (32 * nwords), at most nwords + 1 limbs, u < 2q
        ge = True
        if t[r, 2 * nwords] == 0:
            for j in range(nwords - 1, -1, -1):
                uj = t[r, nwords + j]
                if uj != q[j]:
                    ge = uj > q[j]
                    break
        if ge:
            br = np.int64(0)
            for j in range(nwords):
                d = np.int64(t[r, nwords + j]) - np.int64(q[j]) - br
                if d < 0:
                    d += np.int64(1) << np.int64(32)
                    br = np.int64(1)
                else:
                    br = np.int64(0)
                t[r, nwords + j] = np.uint32(d)
        for j in range(out.shape[1]):
            out[r, j] = t[r, nwords + j] if j < nwords else 0


def redc_np(t, q, qinv0, nwords, out):
    rows, tl = t.shape
    w = t.astype(np.uint64)
    qi0 = np.uint64(qinv0)
    q64 = q.astype(np.uint64)
    for i in range(nwords):
        m = (w[:, i] * qi0) & _M
        c = np.zeros(rows, np.uint64)
        for j in range(nwords):
            s = w[:, i + j] + m * q64[j] + c
            w[:, i + j] = s & _M
            c = s >> _S
        for k in range(i + nwords, tl):
            if not c.any():
                break
            s = w[:, k] + c
            w[:, k] = s & _M
            c = s >> _S
    u = w[:, nwords:2 * nwords + 1]
    # compare u >= q limb-wise from the top
    ge = u[:, nwords] != 0
    undecided = ~ge
    for j in range(nwords - 1, -1, -1):
        gt = u[:, j] > q64[j]
        lt = u[:, j] < q64[j]
        ge |= undecided & gt
        undecided &= ~(gt | lt)
    ge |= undecided  # equal
    br = np.zeros(rows, np.int64)
    res = u[:, :nwords].astype(np.int64)
    for j in range(nwords):
        d = res[:, j] - np.int64(q64[j]) - br
        neg = d < 0
        d[neg] += 1 << 32
        res[:, j] = np.where(ge, d, res[:, j])
        br = np.where(ge, neg, 0).astype(np.int64)
    out[:] = 0
    out[:, :nwords] = res


add_limbs = pick(add_nb, add_np)
sub_limbs = pick(sub_nb, sub_np)
mul_limbs = pick(mul_nb, mul_np)
redc_limbs = pick(redc_nb, redc_np)


def ints_to_limbs(values, n_limbs: int) -> np.ndarray:
    """Pack Python ints into a ``(len(values), n_limbs)`` uint32 array."""
    nbytes = 4 * n_limbs
    buf = b"".join(int(v).to_bytes(nbytes, "little") for v in values)
    return np.frombuffer(buf, dtype="<u4").reshape(len(values), n_limbs).astype(np.uint32)


def limbs_to_ints(arr: np.ndarray) -> list[int]:
    a = np.ascontiguousarray(arr, dtype="<u4")
    return [int.from_bytes(row.tobytes(), "little") for row in a]
