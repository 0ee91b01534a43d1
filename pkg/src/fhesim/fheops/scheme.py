"""Toy RNS-CKKS: keys, encryption and homomorphic operations.

Ciphertexts live in the evaluation domain.  Key switching is the hybrid
variant: each digit is extended to ``Q_l * P`` by fast base conversion,
multiplied into the hint and the sum is brought back with a mod-down by ``P``.
The hint's chain rows are stored pre-multiplied by ``P^-1`` so the mod-down
needs no separate scaling pass, and the ``qhat^-1`` step of each base
conversion is folded into the preceding inverse NTT.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..census import record
from ..ntt import intt_rows, ntt_rows
from ..rns import BaseConverter, RnsBasis
from .encoding import Plaintext
from .params import SchemeParams
from .poly import (
    COEFF,
    EVAL,
    Polynomial,
    _mset,
    automorphism,
    from_signed,
    p_add,
    p_mul,
    p_sub,
    to_eval,
)
from .rng import FheRng


class LevelError(ValueError):
    pass


@dataclass(eq=False)
class SecretKey:
    coeffs: np.ndarray  # ternary, int64
    poly: Polynomial  # eval domain over the full basis


@dataclass(eq=False)
class PublicKey:
    b: Polynomial
    a: Polynomial


@dataclass(eq=False)
class KeySwitchHint:
    """One ``(b_j, a_j)`` pair per digit, over the full basis, chain rows times ``P^-1``."""

    digits: list[tuple[Polynomial, Polynomial]]
    galois: int = 0  # 0 for relinearisation, otherwise the automorphism exponent


@dataclass(eq=False)
class Ciphertext:
    b: Polynomial
    a: Polynomial
    scale: float

    def __post_init__(self):
        if self.b.rows != self.a.rows or self.b.domain != self.a.domain:
            raise ValueError("ciphertext polynomials must share rows and domain")

    @property
    def level(self) -> int:
        return self.b.level

    @property
    def domain(self) -> str:
        return self.b.domain

    def copy(self) -> "Ciphertext":
        return Ciphertext(self.b.copy(), self.a.copy(), self.scale)


# -- sampling helpers ------------------------------------------------------------------
def _uniform(params: SchemeParams, rng: FheRng, rows) -> Polynomial:
    rows = tuple(rows)
    mset = _mset(params, rows)
    data = mset.zeros(params.N)
    for i, q in enumerate(mset.moduli):
        data[i] = rng.uniform_below(q, params.N)
    record("sample")
    return Polynomial(data, rows, EVAL)


def _small(params: SchemeParams, coeffs: np.ndarray, rows) -> Polynomial:
    return to_eval(params, from_signed(params, coeffs, rows))


def _gaussian(params: SchemeParams, rng: FheRng, rows) -> Polynomial:
    return _small(params, rng.gaussian(params.sigma, params.N), rows)


def _chain(level: int) -> tuple[int, ...]:
    return tuple(range(level))


# -- keys ------------------------------------------------------------------------------
def keygen(params: SchemeParams, rng: FheRng | None = None) -> tuple[SecretKey, PublicKey]:
    rng = rng or FheRng(params.seed)
    s = rng.ternary(params.N)
    full = tuple(range(params.k + params.alpha))
    sk = SecretKey(s, _small(params, s, full))
    rows = _chain(params.k)
    a = _uniform(params, rng, rows)
    e = _gaussian(params, rng, rows)
    b = p_sub(params, e, p_mul(params, a, sk.poly.select(rows)))
    return sk, PublicKey(b, a)


def ks_hint_gen(params: SchemeParams, from_key: Polynomial, to_key: SecretKey,
                rng: FheRng | None = None, galois: int = 0) -> KeySwitchHint:
    """Hint that turns ``d * from_key`` into a ciphertext under ``to_key``."""
    rng = rng or FheRng(params.seed)
    k, alpha = params.k, params.alpha
    full = tuple(range(k + alpha))
    mset = _mset(params, full)
    r = 1 << mset.rbits
    Q, P = params.basis.Q, params.special.Q
    primes = params.full.primes
    p_inv = [pow(P, -1, q) for q in params.basis.primes] + [1] * alpha
    digits = []
    for idx in params.digits(k):
        D = 1
        for i in idx:
            D *= params.basis.primes[i]
        qt = (Q // D) * pow((Q // D) % D, -1, D)
        factor = [(P * qt) % q if j < k else 0 for j, q in enumerate(primes)]
        a = _uniform(params, rng, full)
        e = _gaussian(params, rng, full)
        gs = mset.mul_const(from_key.data, mset.const([f * r % q for f, q in zip(factor, primes)]))
        b = mset.sub(mset.add(e.data, gs), mset.mul(a.data, to_key.poly.data))
        post = mset.const([c * r % q for c, q in zip(p_inv, primes)])
        digits.append((Polynomial(mset.mul_const(b, post), full, EVAL),
                       Polynomial(mset.mul_const(a.data, post), full, EVAL)))
    return KeySwitchHint(digits, galois)


def relin_hint(params: SchemeParams, sk: SecretKey, rng: FheRng | None = None) -> KeySwitchHint:
    s2 = p_mul(params, sk.poly, sk.poly)
    return ks_hint_gen(params, s2, sk, rng)


def galois_element(params: SchemeParams, steps: int) -> int:
    return pow(5, steps % params.slots, 2 * params.N)


def rotation_hint(params: SchemeParams, sk: SecretKey, steps: int, rng: FheRng | None = None) -> KeySwitchHint:
    g = galois_element(params, steps)
    return ks_hint_gen(params, automorphism(params, sk.poly, g), sk, rng, galois=g)


# -- encryption ------------------------------------------------------------------------
def encrypt(params: SchemeParams, pk: PublicKey, pt: Plaintext, rng: FheRng | None = None) -> Ciphertext:
    rng = rng or FheRng(params.seed)
    rows = pt.poly.rows
    v = _small(params, rng.ternary(params.N), rows)
    e0 = _gaussian(params, rng, rows)
    e1 = _gaussian(params, rng, rows)
    b = p_add(params, p_add(params, p_mul(params, v, pk.b.select(rows)), e0), pt.poly)
    a = p_add(params, p_mul(params, v, pk.a.select(rows)), e1)
    return Ciphertext(b, a, pt.scale)


def encrypt_sk(params: SchemeParams, sk: SecretKey, pt: Plaintext, rng: FheRng | None = None) -> Ciphertext:
    """Symmetric encryption: ``b = -a*s + e + m``."""
    rng = rng or FheRng(params.seed)
    rows = pt.poly.rows
    a = _uniform(params, rng, rows)
    e = _gaussian(params, rng, rows)
    b = p_add(params, p_sub(params, e, p_mul(params, a, sk.poly.select(rows))), pt.poly)
    return Ciphertext(b, a, pt.scale)


def decrypt(params: SchemeParams, sk: SecretKey, ct: Ciphertext) -> Plaintext:
    m = p_add(params, ct.b, p_mul(params, ct.a, sk.poly.select(ct.b.rows)))
    return Plaintext(m, ct.scale)


# -- key switching ---------------------------------------------------------------------
_CONVERTERS: dict[tuple, BaseConverter] = {}


def _basis(params: SchemeParams, rows) -> RnsBasis:
    return RnsBasis(tuple(params.full.moduli[r] for r in rows))


def _converter(params: SchemeParams, src, dst, post=None) -> BaseConverter:
    key = (params.full.moduli, tuple(src), tuple(dst), tuple(post or ()))
    bc = _CONVERTERS.get(key)
    if bc is None:
        bc = _CONVERTERS[key] = BaseConverter(_basis(params, src), _basis(params, dst), post)
    return bc


def _intt_to_y(params: SchemeParams, data: np.ndarray, rows) -> np.ndarray:
    """Inverse NTT whose final scaling also applies ``qhat^-1``; output in plain form."""
    basis = _basis(params, rows)
    mset = _mset(params, rows)
    y = np.ascontiguousarray(data.copy())
    scale = mset.const([pow(params.N, -1, q) * h % q for q, h in zip(basis.primes, basis.qhat_inv)])
    intt_rows(y, params.plan(rows), scale)
    return y


def key_switch(params: SchemeParams, d: Polynomial, hint: KeySwitchHint) -> tuple[Polynomial, Polynomial]:
    """Return ``(c0, c1)`` with ``c0 + c1*s ~ d * s'`` where the hint encodes ``s'``."""
    if d.domain != EVAL:
        raise ValueError("key switching expects an evaluation-domain input")
    level = d.level
    if d.rows != _chain(level):
        raise ValueError("input must cover a chain prefix")
    k = params.k
    prows = tuple(range(k, k + params.alpha))
    ext = _chain(level) + prows
    pos = {r: i for i, r in enumerate(ext)}
    acc = None
    for j, digit in enumerate(params.digits(level)):
        y = _intt_to_y(params, d.select(digit).data, digit)
        targets = [r for r in ext if r not in digit]
        conv = _converter(params, digit, targets).apply(y, prescaled=True)
        ntt_rows(conv, params.plan(targets))
        full = _mset(params, ext).zeros(params.N)
        full[[pos[r] for r in digit]] = d.select(digit).data
        full[[pos[r] for r in targets]] = conv
        e = Polynomial(full, ext, EVAL)
        hb, ha = hint.digits[j]
        t0 = p_mul(params, e, hb.select(ext))
        t1 = p_mul(params, e, ha.select(ext))
        acc = (t0, t1) if acc is None else (p_add(params, acc[0], t0), p_add(params, acc[1], t1))
    return _mod_down(params, acc[0], level), _mod_down(params, acc[1], level)


def _mod_down(params: SchemeParams, x: Polynomial, level: int) -> Polynomial:
    k = params.k
    prows = tuple(range(k, k + params.alpha))
    qrows = _chain(level)
    y = _intt_to_y(params, x.select(prows).data, prows)
    P = params.special.Q
    post = [pow(P, -1, q) for q in params.basis.primes[:level]]
    conv = _converter(params, prows, qrows, post).apply(y, prescaled=True)
    ntt_rows(conv, params.plan(qrows))
    return p_sub(params, x.select(qrows), Polynomial(conv, qrows, EVAL))


# -- homomorphic operations ------------------------------------------------------------
def _same_scale(s1: float, s2: float) -> None:
    if abs(s1 - s2) > 1e-9 * max(s1, s2):
        raise ValueError(f"scale mismatch: {s1} vs {s2}")


def _same_level(c1, c2) -> None:
    if c1.level != c2.level:
        raise LevelError(f"level mismatch: {c1.level} vs {c2.level}")


def level_down(params: SchemeParams, ct: Ciphertext, level: int) -> Ciphertext:
    """Drop trailing chain moduli without rescaling."""
    if not 1 <= level <= ct.level:
        raise LevelError(f"cannot move from level {ct.level} to {level}")
    rows = _chain(level)
    return Ciphertext(ct.b.select(rows), ct.a.select(rows), ct.scale)


def fadd(params: SchemeParams, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    _same_level(c1, c2)
    _same_scale(c1.scale, c2.scale)
    return Ciphertext(p_add(params, c1.b, c2.b), p_add(params, c1.a, c2.a), c1.scale)


def _pt_rows(pt: Plaintext, level: int) -> Polynomial:
    if pt.level < level:
        raise LevelError(f"plaintext at level {pt.level} cannot meet a level-{level} ciphertext")
    return pt.poly.select(_chain(level))


def addcp(params: SchemeParams, ct: Ciphertext, pt: Plaintext) -> Ciphertext:
    _same_scale(ct.scale, pt.scale)
    m = _pt_rows(pt, ct.level)
    return Ciphertext(p_add(params, ct.b, m), ct.a.copy(), ct.scale)


def multcp(params: SchemeParams, ct: Ciphertext, pt: Plaintext) -> Ciphertext:
    if ct.level < 2:
        raise LevelError("no level left to rescale into")
    m = _pt_rows(pt, ct.level)
    out = Ciphertext(p_mul(params, ct.b, m), p_mul(params, ct.a, m), ct.scale * pt.scale)
    return rescale(params, out)


def fmul(params: SchemeParams, c1: Ciphertext, c2: Ciphertext, hint: KeySwitchHint) -> Ciphertext:
    _same_level(c1, c2)
    if c1.level < 2:
        raise LevelError("fmul needs level >= 2")
    if hint.galois:
        raise ValueError("fmul needs a relinearisation hint")
    d0 = p_mul(params, c1.b, c2.b)
    d1 = p_add(params, p_mul(params, c1.b, c2.a), p_mul(params, c1.a, c2.b))
    d2 = p_mul(params, c1.a, c2.a)
    k0, k1 = key_switch(params, d2, hint)
    out = Ciphertext(p_add(params, d0, k0), p_add(params, d1, k1), c1.scale * c2.scale)
    return rescale(params, out)


def frot(params: SchemeParams, ct: Ciphertext, steps: int, hint: KeySwitchHint | None) -> Ciphertext:
    """Rotate slots left by ``steps`` (``z -> roll(z, -steps)``)."""
    g = galois_element(params, steps)
    if g == 1:
        return ct.copy()
    if hint is None or hint.galois != g:
        raise ValueError(f"rotation by {steps} needs the hint for Galois element {g}")
    b = automorphism(params, ct.b, g)
    a = automorphism(params, ct.a, g)
    k0, k1 = key_switch(params, a, hint)
    return Ciphertext(p_add(params, b, k0), k1, ct.scale)


def rescale(params: SchemeParams, ct: Ciphertext) -> Ciphertext:
    """Divide by the last chain prime with rounding and drop it."""
    level = ct.level
    if level < 2:
        raise LevelError("cannot rescale a level-1 ciphertext")
    q_last = params.basis.primes[level - 1]
    return Ciphertext(_rescale_poly(params, ct.b), _rescale_poly(params, ct.a), ct.scale / q_last)


def _rescale_poly(params: SchemeParams, x: Polynomial) -> Polynomial:
    level = x.level
    last = (level - 1,)
    rows = _chain(level - 1)
    ql = params.basis.primes[level - 1]
    r = x.select(last).data.copy()
    lm = _mset(params, last)
    intt_rows(r, params.plan(last), lm.const([pow(params.N, -1, ql)]))
    mset = _mset(params, rows)
    R = 1 << mset.rbits
    qs = mset.moduli
    if mset.word:
        rc = r[0].astype(np.int64)
        rc = np.where(rc > ql // 2, rc - ql, rc)
        t = (rc[None, :] % np.array(qs, np.int64)[:, None]).astype(np.uint64)
    else:
        rc = np.where(r[0] > ql // 2, r[0] - ql, r[0])
        t = rc[None, :] % np.array(qs, dtype=object)[:, None]
    record("mod_add", level - 1)
    t = mset.mul_const(t, mset.const([pow(ql, -1, q) * R % q * R % q for q in qs]))
    record("mod_mult", level - 1)
    t = np.ascontiguousarray(t)
    ntt_rows(t, params.plan(rows))
    c = mset.mul_const(x.select(rows).data, mset.const([pow(ql, -1, q) * R % q for q in qs]))
    record("mod_mult", level - 1)
    return p_sub(params, Polynomial(c, rows, x.domain), Polynomial(t, rows, x.domain))


__all__ = [
    "COEFF",
    "Ciphertext",
    "EVAL",
    "KeySwitchHint",
    "LevelError",
    "PublicKey",
    "SecretKey",
    "addcp",
    "decrypt",
    "encrypt",
    "encrypt_sk",
    "fadd",
    "fmul",
    "frot",
    "galois_element",
    "key_switch",
    "keygen",
    "ks_hint_gen",
    "level_down",
    "multcp",
    "relin_hint",
    "rescale",
    "rotation_hint",
]
