"""Vectorised Montgomery arithmetic over stacks of residue rows.

A ``ModulusSet`` pairs ``L`` Montgomery contexts with ``(L, N)`` arrays whose
row ``i`` lives modulo ``q_i``.  Datapaths up to 64 bits use ``uint64`` arrays
and the numba/numpy kernels below; wider datapaths fall back to numpy object
arrays of Python ints (exact, slower).
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .._backend import njit, pick
from .montgomery import MontgomeryContext

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


@njit(inline="always")
def mm64(a, b, q, qinv):
    """Montgomery product with R = 2**64 for q < 2**62 (a, b < q)."""
    a0 = a & _M32
    a1 = a >> _S32
    b0 = b & _M32
    b1 = b >> _S32
    lolo = a0 * b0
    mid = a0 * b1 + a1 * b0
    t_lo = lolo + ((mid & _M32) << _S32)
    c = np.uint64(1) if t_lo < lolo else np.uint64(0)
    t_hi = a1 * b1 + (mid >> _S32) + c
    m = t_lo * qinv
    m0 = m & _M32
    m1 = m >> _S32
    q0 = q & _M32
    q1 = q >> _S32
    p00 = m0 * q0
    p01 = m0 * q1
    p10 = m1 * q0
    x = (p00 >> _S32) + (p01 & _M32) + (p10 & _M32)
    mq_hi = m1 * q1 + (p01 >> _S32) + (p10 >> _S32) + (x >> _S32)
    u = t_hi + mq_hi + (np.uint64(1) if t_lo != 0 else np.uint64(0))
    return u - q if u >= q else u


@njit(inline="always")
def mm32(a, b, q, qinv):
    """Montgomery product with R = 2**32 for q < 2**30."""
    t = a * b
    m = ((t & _M32) * qinv) & _M32
    u = (t + m * q) >> _S32
    return u - q if u >= q else u


@njit(inline="always")
def mmul(a, b, q, qinv, rbits):
    if rbits == 64:
        return mm64(a, b, q, qinv)
    return mm32(a, b, q, qinv)


@njit
def mont_mul_nb(a, b, q, qinv, rbits, out):
    rows, n = a.shape
    for r in range(rows):
        qr = q[r]
        qi = qinv[r]
        for j in range(n):
            out[r, j] = mmul(a[r, j], b[r, j], qr, qi, rbits)


def mm64_np(a, b, q, qinv):
    a0 = a & _M32
    a1 = a >> _S32
    b0 = b & _M32
    b1 = b >> _S32
    lolo = a0 * b0
    mid = a0 * b1 + a1 * b0
    t_lo = lolo + ((mid & _M32) << _S32)
    t_hi = a1 * b1 + (mid >> _S32) + (t_lo < lolo)
    m = t_lo * qinv
    m0 = m & _M32
    m1 = m >> _S32
    q0 = q & _M32
    q1 = q >> _S32
    p00 = m0 * q0
    p01 = m0 * q1
    p10 = m1 * q0
    x = (p00 >> _S32) + (p01 & _M32) + (p10 & _M32)
    mq_hi = m1 * q1 + (p01 >> _S32) + (p10 >> _S32) + (x >> _S32)
    u = t_hi + mq_hi + (t_lo != 0)
    return np.where(u >= q, u - q, u)


def mm32_np(a, b, q, qinv):
    t = a * b
    m = ((t & _M32) * qinv) & _M32
    u = (t + m * q) >> _S32
    return np.where(u >= q, u - q, u)


def mont_mul_np(a, b, q, qinv, rbits, out):
    qc = q[:, None]
    qic = qinv[:, None]
    with np.errstate(over="ignore"):
        out[:] = mm64_np(a, b, qc, qic) if rbits == 64 else mm32_np(a, b, qc, qic)


mont_mul_u64 = pick(mont_mul_nb, mont_mul_np)


class ModulusSet:
    """Stack of contexts sharing one datapath width."""

    def __init__(self, contexts: Sequence[MontgomeryContext]):
        ctxs = tuple(contexts)
        if not ctxs:
            raise ValueError("empty modulus set")
        widths = {c.width for c in ctxs}
        if len(widths) != 1:
            raise ValueError(f"mixed datapath widths {sorted(widths)}")
        self.contexts = ctxs
        self.width = ctxs[0].width
        self.moduli = tuple(c.q for c in ctxs)
        self.word = self.width <= 64
        if self.word:
            self.dtype = np.uint64
            self.rbits = 64 if self.width == 64 else 32
            # for width 32 the context R is 2**32 already
            self.q = np.array(self.moduli, np.uint64)
            self.qinv = np.array([(-pow(q, -1, 1 << self.rbits)) % (1 << self.rbits) for q in self.moduli], np.uint64)
        else:
            self.dtype = object
            self.rbits = self.width
            self.q = np.array(self.moduli, dtype=object)
            self.qinv = np.array([c.q_inv_neg_full for c in ctxs], dtype=object)
        self._mask = (1 << self.rbits) - 1
        r = 1 << self.rbits
        self.r2 = self.const([r * r % q for q in self.moduli])
        self.one = self.const([r % q for q in self.moduli])

    def __len__(self):
        return len(self.contexts)

    def __getitem__(self, idx) -> "ModulusSet":
        if isinstance(idx, slice):
            return ModulusSet(self.contexts[idx])
        if isinstance(idx, (list, tuple, np.ndarray)):
            return ModulusSet([self.contexts[i] for i in idx])
        return ModulusSet([self.contexts[idx]])

    def __eq__(self, other):
        return isinstance(other, ModulusSet) and self.contexts == other.contexts

    def __hash__(self):
        return hash(self.contexts)

    # -- array construction ------------------------------------------------------------
    def const(self, values) -> np.ndarray:
        """Per-row constants as a 1-D array of the set's dtype."""
        return np.array([int(v) for v in values], dtype=self.dtype)

    def array(self, rows) -> np.ndarray:
        """Reduce integer rows into an ``(L, N)`` array of canonical residues."""
        if self.word:
            arr = np.asarray(rows)
            if arr.dtype == object or arr.dtype.kind == "i":
                obj = np.asarray(rows, dtype=object) % self.q[:, None].astype(object)
                return obj.astype(np.uint64)
            return np.asarray(arr, np.uint64) % self.q[:, None]
        obj = np.empty(np.shape(rows), dtype=object)
        obj[...] = rows
        return obj % self.q[:, None]

    def zeros(self, n: int) -> np.ndarray:
        if self.word:
            return np.zeros((len(self), n), np.uint64)
        out = np.empty((len(self), n), dtype=object)
        out.fill(0)
        return out

    # -- arithmetic --------------------------------------------------------------------
    def _col(self, v):
        return v[:, None]

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Row-wise Montgomery product ``a * b * R^-1 mod q``."""
        if self.word:
            a, b = np.broadcast_arrays(np.asarray(a, np.uint64), np.asarray(b, np.uint64))
            a = np.ascontiguousarray(a)
            b = np.ascontiguousarray(b)
            out = np.empty(a.shape, np.uint64)
            mont_mul_u64(a, b, self.q, self.qinv, self.rbits, out)
            return out
        q = self._col(self.q)
        t = a * b
        m = ((t & self._mask) * self._col(self.qinv)) & self._mask
        u = (t + m * q) >> self.rbits
        return np.where(u >= q, u - q, u)

    def mul_const(self, a: np.ndarray, consts: np.ndarray) -> np.ndarray:
        """Montgomery product of each row with its own scalar constant."""
        return self.mul(a, np.broadcast_to(self._col(consts), a.shape))

    def add(self, a, b):
        q = self._col(self.q)
        s = a + b
        return np.where(s >= q, s - q, s)

    def sub(self, a, b):
        q = self._col(self.q)
        if self.word:
            return np.where(a >= b, a - b, a + (q - b))
        d = a - b
        return np.where(d < 0, d + q, d)

    def neg(self, a):
        q = self._col(self.q)
        return np.where(a == 0, a, q - a)

    def to_mont(self, a):
        return self.mul_const(a, self.r2)

    def from_mont(self, a):
        ones = np.ones(len(self), dtype=np.uint64) if self.word else self.const([1] * len(self))
        return self.mul_const(a, ones)

    def to_object(self, a) -> np.ndarray:
        return np.asarray(a).astype(object)
