"""Negacyclic NTT over ``Z_q[x]/(x^N + 1)``.

Convention: ``ntt_direct`` maps coefficients in natural order to evaluations in
bit-reversed order, ``out[i] = a(psi**(2*brv(i) + 1))``; there is no pre- or
post-scaling pass since the twiddles absorb the powers of ``psi``.  Twiddles
are kept in Montgomery form, so a transform commutes with the Montgomery map
and works on plain or Montgomery-form residues alike.  The inverse folds the
``N**-1`` factor into its final pass.

The four-step path computes the same vector: the length ``N = n*n`` input is
gathered into an ``n x n`` matrix whose row ``c`` holds ``a[c], a[c+n], ...``,
rows get an ``n``-point negacyclic NTT (root ``psi**n``), element ``[c, p]``
is twisted by ``psi**(c*(2*brv(p)+1))``, the matrix is transposed with the
recursive TU transpose, and rows get an ``n``-point cyclic NTT (root
``psi**(2n)``).  The row-major result is already in the direct transform's
bit-reversed order.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass, field

import numpy as np

from ..census import record
from ..modarith import ModElement, ModulusSet, mod_add, mod_mul, mod_sub
from ..transpose import MatrixView, TuHierarchy, transpose_recursive
from .kernels import ct_forward, gs_inverse
from .tables import (
    NttPlan,
    NttTables,
    bit_reverse,
    bit_reverse_indices,
    cyclic_table,
    get_tables,
    negacyclic_table,
)

__all__ = [
    "NttPlan",
    "NttTables",
    "TrafficMeter",
    "bit_reverse",
    "bit_reverse_indices",
    "butterfly",
    "get_tables",
    "intt_direct",
    "intt_four_step",
    "intt_rows",
    "ntt_direct",
    "ntt_four_step",
    "ntt_rows",
    "pointwise_mul",
]


@dataclass
class TrafficMeter:
    """Element reads/writes of a transform, split by access pattern."""

    contiguous_reads: int = 0
    contiguous_writes: int = 0
    strided_reads: int = 0
    strided_writes: int = 0
    transpose_moves: int = 0
    tu: TuHierarchy = field(default_factory=TuHierarchy)

    def row_pass(self, n_elems: int) -> None:
        self.contiguous_reads += n_elems
        self.contiguous_writes += n_elems

    def gather(self, n_elems: int) -> None:
        self.strided_reads += n_elems
        self.contiguous_writes += n_elems

    @property
    def total(self) -> int:
        return self.contiguous_reads + self.contiguous_writes + self.strided_reads + self.strided_writes

    @property
    def strided_share(self) -> float:
        tot = self.total
        return (self.strided_reads + self.strided_writes) / tot if tot else 0.0


def butterfly(u: ModElement, v: ModElement, w: ModElement) -> tuple[ModElement, ModElement]:
    """Cooley-Tukey butterfly ``(u + w*v, u - w*v)``; ``w`` is a Montgomery-form twiddle."""
    wv = mod_mul(w, v)
    return mod_add(u, wv), mod_sub(u, wv)


def _as_row(coeffs, tables: NttTables) -> np.ndarray:
    mset = tables.mset
    if isinstance(coeffs, np.ndarray) and coeffs.dtype == mset.dtype:
        a = coeffs.reshape(1, -1).copy()
    else:
        a = np.array([int(c) for c in np.asarray(coeffs).ravel()], dtype=mset.dtype).reshape(1, -1)
    if a.shape[1] != tables.N:
        raise ValueError(f"expected {tables.N} coefficients, got {a.shape[1]}")
    return a


def ntt_direct(coeffs, tables: NttTables) -> np.ndarray:
    """Forward negacyclic NTT; output in bit-reversed order."""
    a = _as_row(coeffs, tables)
    m = tables.mset
    ct_forward(a, tables.forward_twiddles, m.q, m.qinv, m.rbits)
    record("ntt")
    return a[0]


def intt_direct(values, tables: NttTables) -> np.ndarray:
    """Inverse of :func:`ntt_direct` (bit-reversed input, natural output)."""
    a = _as_row(values, tables)
    m = tables.mset
    gs_inverse(a, tables.inverse_twiddles, tables.n_inv, m.q, m.qinv, m.rbits)
    record("intt")
    return a[0]


def ntt_rows(a: np.ndarray, plan: NttPlan) -> np.ndarray:
    """Forward NTT of every residue row of ``a`` (in place, returned for chaining)."""
    m = plan.mset
    ct_forward(a, plan.fwd, m.q, m.qinv, m.rbits)
    record("ntt", a.shape[0])
    return a


def intt_rows(a: np.ndarray, plan: NttPlan, scale: np.ndarray | None = None) -> np.ndarray:
    """Inverse NTT of every row.  ``scale`` replaces the default Montgomery-form ``N**-1``."""
    m = plan.mset
    sc = plan.n_inv if scale is None else scale
    gs_inverse(a, plan.inv, sc, m.q, m.qinv, m.rbits)
    record("intt", a.shape[0])
    return a


def pointwise_mul(a, b, tables: NttTables | ModulusSet) -> np.ndarray:
    """Element-wise Montgomery products of two evaluation-domain vectors."""
    mset = tables.mset if isinstance(tables, NttTables) else tables
    x = np.asarray(a, dtype=mset.dtype).reshape(len(mset), -1)
    y = np.asarray(b, dtype=mset.dtype).reshape(len(mset), -1)
    if x.shape != y.shape:
        raise ValueError("operand shapes differ")
    out = mset.mul(x, y)
    record("mod_mult", x.shape[0])
    return out.reshape(np.shape(a))


class _FourStepTables:
    def __init__(self, tables: NttTables):
        N, q = tables.N, tables.q
        bits = N.bit_length() - 1
        if N < 4 or bits % 2:
            raise ValueError(f"four-step needs N = n*n with n a power of two, got N={N}")
        n = 1 << (bits // 2)
        self.n = n
        mset = tables.mset
        r = 1 << mset.rbits
        psi = tables.psi
        psi_n = pow(psi, n, q)
        omega = pow(psi, 2 * n, q)

        def mont(vals):
            return np.array([v * r % q for v in vals], dtype=mset.dtype)

        def tile(row):
            return np.ascontiguousarray(np.broadcast_to(row, (n, n)))

        self.neg_fwd = tile(mont(negacyclic_table(psi_n, n, q)))
        self.neg_inv = tile(mont(negacyclic_table(pow(psi_n, -1, q), n, q)))
        self.cyc_fwd = tile(mont(cyclic_table(omega, n, q)))
        self.cyc_inv = tile(mont(cyclic_table(pow(omega, -1, q), n, q)))
        brv = bit_reverse_indices(n)
        exps = np.outer(np.arange(n), 2 * brv + 1)
        # psi ** (c*(2*brv(p)+1)); exponents reduced mod 2N
        pw = [pow(psi, e, q) for e in range(2 * N)]
        psi_inv = pow(psi, -1, q)
        pw_inv = [pow(psi_inv, e, q) for e in range(2 * N)]
        flat = (exps % (2 * N)).ravel()
        self.twist = mont([pw[e] for e in flat]).reshape(n, n)
        self.untwist = mont([pw_inv[e] for e in flat]).reshape(n, n)
        n_inv = pow(n, -1, q) * r % q
        self.n_inv = np.array([n_inv] * n, dtype=mset.dtype)
        self.q = np.ascontiguousarray(np.broadcast_to(mset.q, (n,)))
        self.qinv = np.ascontiguousarray(np.broadcast_to(mset.qinv, (n,)))
        self.rbits = mset.rbits
        self.mset = mset


_FOUR_STEP_CACHE: "weakref.WeakKeyDictionary[NttTables, _FourStepTables]" = weakref.WeakKeyDictionary()


def _four_step(tables: NttTables) -> _FourStepTables:
    fs = _FOUR_STEP_CACHE.get(tables)
    if fs is None:
        fs = _FOUR_STEP_CACHE[tables] = _FourStepTables(tables)
    return fs


def _twist(x: np.ndarray, t: np.ndarray, fs: _FourStepTables) -> np.ndarray:
    m = fs.mset
    return m.mul(x.reshape(1, -1), t.reshape(1, -1)).reshape(x.shape)


def ntt_four_step(coeffs, tables: NttTables, traffic: TrafficMeter | None = None) -> np.ndarray:
    """Four-step forward NTT; equals :func:`ntt_direct` exactly."""
    fs = _four_step(tables)
    n = fs.n
    meter = traffic if traffic is not None else TrafficMeter()
    a = _as_row(coeffs, tables)[0]
    # gather stride-n elements into rows
    mat = np.ascontiguousarray(a.reshape(n, n).T)
    meter.gather(n * n)
    ct_forward(mat, fs.neg_fwd, fs.q, fs.qinv, fs.rbits)
    meter.row_pass(n * n)
    mat = _twist(mat, fs.twist, fs)
    meter.row_pass(n * n)
    view = MatrixView(mat.reshape(-1), n)
    _, rep = transpose_recursive(view, meter.tu)
    meter.transpose_moves += rep.total_moves
    mat = view.backing.reshape(n, n)
    ct_forward(mat, fs.cyc_fwd, fs.q, fs.qinv, fs.rbits)
    meter.row_pass(n * n)
    record("ntt")
    return mat.reshape(-1)


def intt_four_step(values, tables: NttTables, traffic: TrafficMeter | None = None) -> np.ndarray:
    """Inverse of :func:`ntt_four_step`; equals :func:`intt_direct` exactly."""
    fs = _four_step(tables)
    n = fs.n
    meter = traffic if traffic is not None else TrafficMeter()
    mat = _as_row(values, tables)[0].reshape(n, n).copy()
    gs_inverse(mat, fs.cyc_inv, fs.n_inv, fs.q, fs.qinv, fs.rbits)
    meter.row_pass(n * n)
    view = MatrixView(mat.reshape(-1), n)
    _, rep = transpose_recursive(view, meter.tu)
    meter.transpose_moves += rep.total_moves
    mat = _twist(view.backing.reshape(n, n), fs.untwist, fs)
    meter.row_pass(n * n)
    gs_inverse(mat, fs.neg_inv, fs.n_inv, fs.q, fs.qinv, fs.rbits)
    meter.row_pass(n * n)
    out = np.ascontiguousarray(mat.T).reshape(-1)
    meter.strided_writes += n * n
    meter.contiguous_reads += n * n
    record("intt")
    return out
