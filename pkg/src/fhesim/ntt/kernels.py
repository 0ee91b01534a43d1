"""Butterfly loops for the negacyclic/cyclic NTT.

Forward transforms use the Cooley-Tukey dataflow (natural order in,
bit-reversed out); inverse transforms use Gentleman-Sande (bit-reversed in,
natural out).  Twiddle tables are in Montgomery form and indexed ``m + i``
for block ``i`` of stage ``m``, so the same loop serves negacyclic and cyclic
transforms: only the table differs.
"""
from __future__ import annotations

import numpy as np

from .._backend import njit, pick
from ..modarith.vector import mm32_np, mm64_np, mmul


@njit
def ct_forward_nb(a, tw, q, qinv, rbits):
    rows, n = a.shape
    for r in range(rows):
        qr = q[r]
        qi = qinv[r]
        t = n
        m = 1
        while m < n:
            t >>= 1
            for i in range(m):
                s = tw[r, m + i]
                j1 = 2 * i * t
                for j in range(j1, j1 + t):
                    u = a[r, j]
                    v = mmul(a[r, j + t], s, qr, qi, rbits)
                    x = u + v
                    a[r, j] = x - qr if x >= qr else x
                    a[r, j + t] = u - v if u >= v else u + (qr - v)
            m <<= 1


@njit
def gs_inverse_nb(a, itw, scale, q, qinv, rbits):
    rows, n = a.shape
    for r in range(rows):
        qr = q[r]
        qi = qinv[r]
        t = 1
        m = n
        while m > 1:
            h = m >> 1
            j1 = 0
            for i in range(h):
                s = itw[r, h + i]
                for j in range(j1, j1 + t):
                    u = a[r, j]
                    v = a[r, j + t]
                    x = u + v
                    a[r, j] = x - qr if x >= qr else x
                    d = u - v if u >= v else u + (qr - v)
                    a[r, j + t] = mmul(d, s, qr, qi, rbits)
                j1 += 2 * t
            t <<= 1
            m = h
        sc = scale[r]
        for j in range(n):
            a[r, j] = mmul(a[r, j], sc, qr, qi, rbits)


def _mul_np(a, b, q, qinv, rbits):
    if a.dtype == object:
        mask = (1 << rbits) - 1
        t = a * b
        mm = ((t & mask) * qinv) & mask
        u = (t + mm * q) >> rbits
        return np.where(u >= q, u - q, u)
    with np.errstate(over="ignore"):
        return mm64_np(a, b, q, qinv) if rbits == 64 else mm32_np(a, b, q, qinv)


def _add_np(a, b, q):
    s = a + b
    return np.where(s >= q, s - q, s)


def _sub_np(a, b, q):
    if a.dtype == object:
        d = a - b
        return np.where(d < 0, d + q, d)
    return np.where(a >= b, a - b, a + (q - b))


def ct_forward_np(a, tw, q, qinv, rbits):
    """Stage-vectorised forward transform; works for uint64 and object arrays."""
    rows, n = a.shape
    q3 = q.reshape(rows, 1, 1)
    qi3 = qinv.reshape(rows, 1, 1)
    t = n
    m = 1
    while m < n:
        t >>= 1
        blk = a.reshape(rows, m, 2 * t)
        s = tw[:, m:2 * m].reshape(rows, m, 1)
        u = blk[:, :, :t].copy()
        v = _mul_np(blk[:, :, t:], s, q3, qi3, rbits)
        blk[:, :, :t] = _add_np(u, v, q3)
        blk[:, :, t:] = _sub_np(u, v, q3)
        m <<= 1


def gs_inverse_np(a, itw, scale, q, qinv, rbits):
    rows, n = a.shape
    q3 = q.reshape(rows, 1, 1)
    qi3 = qinv.reshape(rows, 1, 1)
    t = 1
    m = n
    while m > 1:
        h = m >> 1
        blk = a.reshape(rows, h, 2 * t)
        s = itw[:, h:2 * h].reshape(rows, h, 1)
        u = blk[:, :, :t].copy()
        v = blk[:, :, t:].copy()
        blk[:, :, :t] = _add_np(u, v, q3)
        blk[:, :, t:] = _mul_np(_sub_np(u, v, q3), s, q3, qi3, rbits)
        t <<= 1
        m = h
    a[:] = _mul_np(a, scale.reshape(rows, 1), q.reshape(rows, 1), qinv.reshape(rows, 1), rbits)


_ct_word = pick(ct_forward_nb, ct_forward_np)
_gs_word = pick(gs_inverse_nb, gs_inverse_np)


def ct_forward(a, tw, q, qinv, rbits):
    """In-place forward transform of every row of ``a``."""
    if a.dtype == object:
        ct_forward_np(a, tw, q, qinv, rbits)
    else:
        _ct_word(a, tw, q, qinv, rbits)


def gs_inverse(a, itw, scale, q, qinv, rbits):
    """In-place inverse transform; each row is finally Montgomery-multiplied by ``scale[row]``."""
    if a.dtype == object:
        gs_inverse_np(a, itw, scale, q, qinv, rbits)
    else:
        _gs_word(a, itw, scale, q, qinv, rbits)
