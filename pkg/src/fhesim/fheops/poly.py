"""RNS polynomials with census-instrumented arithmetic.

Residues are stored in Montgomery form.  ``rows`` records which entries of the
params' full basis (chain then special primes) the array covers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..census import record
from ..ntt import bit_reverse_indices, intt_rows, ntt_rows
from .params import SchemeParams

COEFF = "coeff"
EVAL = "eval"


@dataclass(eq=False)
class Polynomial:
    data: np.ndarray
    rows: tuple[int, ...]
    domain: str = EVAL

    def __post_init__(self):
        self.rows = tuple(self.rows)
        if self.data.ndim != 2 or self.data.shape[0] != len(self.rows):
            raise ValueError("data must be (len(rows), N)")
        if self.domain not in (COEFF, EVAL):
            raise ValueError(f"unknown domain {self.domain!r}")

    @property
    def N(self) -> int:
        return self.data.shape[1]

    @property
    def level(self) -> int:
        return len(self.rows)

    def copy(self) -> "Polynomial":
        return Polynomial(self.data.copy(), self.rows, self.domain)

    def select(self, rows) -> "Polynomial":
        pos = {r: i for i, r in enumerate(self.rows)}
        return Polynomial(self.data[[pos[r] for r in rows]], rows, self.domain)

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.rows == other.rows
            and self.domain == other.domain
            and np.array_equal(self.data, other.data)
        )


def _mset(params: SchemeParams, rows):
    return params.plan(rows).mset


def _check(a: Polynomial, b: Polynomial):
    if a.rows != b.rows or a.domain != b.domain:
        raise ValueError("polynomials differ in rows or domain")


def p_add(params, a: Polynomial, b: Polynomial) -> Polynomial:
    _check(a, b)
    record("mod_add", a.level)
    return Polynomial(_mset(params, a.rows).add(a.data, b.data), a.rows, a.domain)


def p_sub(params, a: Polynomial, b: Polynomial) -> Polynomial:
    _check(a, b)
    record("mod_add", a.level)
    return Polynomial(_mset(params, a.rows).sub(a.data, b.data), a.rows, a.domain)


def p_neg(params, a: Polynomial) -> Polynomial:
    record("mod_add", a.level)
    return Polynomial(_mset(params, a.rows).neg(a.data), a.rows, a.domain)


def p_mul(params, a: Polynomial, b: Polynomial) -> Polynomial:
    """Pointwise Montgomery product; both operands in the evaluation domain."""
    _check(a, b)
    if a.domain != EVAL:
        raise ValueError("polynomial products need the evaluation domain")
    record("mod_mult", a.level)
    return Polynomial(_mset(params, a.rows).mul(a.data, b.data), a.rows, EVAL)


def to_eval(params, a: Polynomial) -> Polynomial:
    if a.domain == EVAL:
        return a
    d = np.ascontiguousarray(a.data.copy())
    ntt_rows(d, params.plan(a.rows))
    return Polynomial(d, a.rows, EVAL)


def to_coeff(params, a: Polynomial) -> Polynomial:
    if a.domain == COEFF:
        return a
    d = np.ascontiguousarray(a.data.copy())
    intt_rows(d, params.plan(a.rows))
    return Polynomial(d, a.rows, COEFF)


def from_signed(params, coeffs: np.ndarray, rows) -> Polynomial:
    """Coefficient-domain polynomial from signed integer coefficients (Montgomery form)."""
    rows = tuple(rows)
    mset = _mset(params, rows)
    if mset.word and coeffs.dtype != object:
        c = np.asarray(coeffs, np.int64)
        q = np.array(mset.moduli, np.int64)[:, None]
        data = (c[None, :] % q).astype(np.uint64)
    else:
        c = np.asarray(coeffs, dtype=object)
        q = np.array(mset.moduli, dtype=object)[:, None]
        data = c[None, :] % q
        if mset.word:
            data = data.astype(np.uint64)
    data = np.ascontiguousarray(mset.to_mont(data))
    return Polynomial(data, rows, COEFF)


def centered_coeffs(params, a: Polynomial) -> np.ndarray:
    """CRT-lift a coefficient-domain polynomial to signed Python ints in ``(-Q/2, Q/2]``."""
    if a.domain != COEFF:
        raise ValueError("need coefficient domain")
    mset = _mset(params, a.rows)
    plain = mset.from_mont(a.data).astype(object)
    qs = mset.moduli
    Q = 1
    for q in qs:
        Q *= q
    acc = np.zeros(a.N, dtype=object)
    for i, q in enumerate(qs):
        qh = Q // q
        acc = acc + (plain[i] * pow(qh % q, -1, q) % q) * qh
    acc = acc % Q
    return np.where(acc > Q // 2, acc - Q, acc)


# -- automorphisms ---------------------------------------------------------------------
_PERM_CACHE: dict[tuple[int, int], np.ndarray] = {}


def eval_permutation(N: int, g: int) -> np.ndarray:
    """``perm`` with ``sigma_g(a)_eval[i] = a_eval[perm[i]]`` for the bit-reversed NTT order.

    Slot ``i`` holds ``a(psi**e_i)`` with ``e_i = 2*brv(i)+1``, and
    ``sigma_g(a)(psi**e) = a(psi**(g*e))``.
    """
    key = (N, g % (2 * N))
    perm = _PERM_CACHE.get(key)
    if perm is None:
        brv = bit_reverse_indices(N)
        e = (2 * brv + 1) * (g % (2 * N)) % (2 * N)
        perm = brv[(e - 1) // 2]
        perm.setflags(write=False)
        _PERM_CACHE[key] = perm
    return perm


def automorphism(params, a: Polynomial, g: int) -> Polynomial:
    if g % 2 == 0:
        raise ValueError("Galois element must be odd")
    record("automorphism", a.level)
    if a.domain == EVAL:
        return Polynomial(a.data[:, eval_permutation(a.N, g)], a.rows, EVAL)
    return Polynomial(automorphism_coeff(a.data, g, _mset(params, a.rows)), a.rows, COEFF)


def automorphism_coeff(data: np.ndarray, g: int, mset) -> np.ndarray:
    """``x -> x**g`` on coefficients: index ``j`` goes to ``j*g mod 2N`` with a sign fold."""
    N = data.shape[1]
    j = np.arange(N)
    dst = j * (g % (2 * N)) % (2 * N)
    neg = dst >= N
    dst = np.where(neg, dst - N, dst)
    out = np.empty_like(data)
    vals = np.where(neg[None, :], mset.neg(data), data)
    out[:, dst] = vals
    return out
