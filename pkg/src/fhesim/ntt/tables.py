from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..modarith import ModulusSet, MontgomeryContext, primitive_2n_root


def bit_reverse(x: int, bits: int) -> int:
    r = 0
    for _ in range(bits):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


@lru_cache(maxsize=64)
def bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    out = np.zeros(n, np.int64)
    for b in range(bits):
        out |= ((idx >> b) & 1) << (bits - 1 - b)
    out.setflags(write=False)
    return out


def negacyclic_table(root: int, n: int, q: int) -> list[int]:
    """``T[k] = root**brv(k)`` for a primitive ``2n``-th root (k >= 1 used)."""
    bits = n.bit_length() - 1
    return [pow(root, bit_reverse(k, bits), q) for k in range(n)]


def cyclic_table(omega: int, n: int, q: int) -> list[int]:
    """Stage-ordered twiddles for the cyclic transform with primitive ``n``-th root ``omega``.

    Block ``i`` of stage ``m`` uses ``omega**(brv_{log m}(i) * n / (2m))``.
    """
    out = [1] * n
    m = 1
    while m < n:
        lb = m.bit_length() - 1
        step = n // (2 * m)
        for i in range(m):
            out[m + i] = pow(omega, bit_reverse(i, lb) * step, q)
        m <<= 1
    return out


@dataclass(frozen=True, eq=False)
class NttTables:
    """Twiddles for the length-``N`` negacyclic transform modulo one prime."""

    ctx: MontgomeryContext
    N: int
    psi: int = 0
    mset: ModulusSet = field(init=False, repr=False)
    forward_twiddles: np.ndarray = field(init=False, repr=False)
    inverse_twiddles: np.ndarray = field(init=False, repr=False)
    n_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n, q = self.N, self.ctx.q
        if n < 2 or n & (n - 1):
            raise ValueError(f"N must be a power of two >= 2, got {n}")
        psi = self.psi or primitive_2n_root(q, n)
        if pow(psi, 2 * n, q) != 1 or pow(psi, n, q) != q - 1:
            raise ValueError(f"{psi} is not a primitive {2 * n}-th root of unity mod {q}")
        object.__setattr__(self, "psi", psi)
        mset = ModulusSet([self.ctx])
        object.__setattr__(self, "mset", mset)
        r = 1 << mset.rbits
        psi_inv = pow(psi, -1, q)
        fwd = [v * r % q for v in negacyclic_table(psi, n, q)]
        inv = [v * r % q for v in negacyclic_table(psi_inv, n, q)]
        object.__setattr__(self, "forward_twiddles", np.array(fwd, dtype=mset.dtype).reshape(1, n))
        object.__setattr__(self, "inverse_twiddles", np.array(inv, dtype=mset.dtype).reshape(1, n))
        object.__setattr__(self, "n_inv", mset.const([pow(n, -1, q) * r % q]))

    @property
    def q(self) -> int:
        return self.ctx.q


class NttPlan:
    """Row-stacked tables for transforming ``(L, N)`` arrays over a ``ModulusSet``."""

    def __init__(self, mset: ModulusSet, N: int):
        self.mset = mset
        self.N = N
        self.tables = [get_tables(c, N) for c in mset.contexts]
        self.fwd = np.ascontiguousarray(np.vstack([t.forward_twiddles for t in self.tables]))
        self.inv = np.ascontiguousarray(np.vstack([t.inverse_twiddles for t in self.tables]))
        self.n_inv = np.concatenate([t.n_inv for t in self.tables])
        self.n_inv_plain = mset.const([pow(N, -1, q) for q in mset.moduli])

    def rows(self, idx) -> "NttPlan":
        sub = NttPlan.__new__(NttPlan)
        sub.mset = self.mset[idx]
        sub.N = self.N
        sel = list(range(len(self.tables)))[idx] if isinstance(idx, slice) else list(idx)
        sub.tables = [self.tables[i] for i in sel]
        sub.fwd = np.ascontiguousarray(self.fwd[sel])
        sub.inv = np.ascontiguousarray(self.inv[sel])
        sub.n_inv = self.n_inv[sel]
        sub.n_inv_plain = self.n_inv_plain[sel]
        return sub


@lru_cache(maxsize=512)
def get_tables(ctx: MontgomeryContext, N: int) -> NttTables:
    return NttTables(ctx, N)
