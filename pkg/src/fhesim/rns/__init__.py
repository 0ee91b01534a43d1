"""Residue number system over NTT-friendly primes.

Scalar helpers (``decompose``, ``reconstruct``, ``base_convert``) work on plain
integer residues.  :class:`BaseConverter` is the vectorised kernel used by key
switching; it consumes and produces Montgomery-form ``(L, N)`` arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..census import record
from ..modarith import GUARD_BITS, ModulusSet, MontgomeryContext, ntt_primes_below

__all__ = [
    "BaseConverter",
    "RnsBasis",
    "RnsRangeError",
    "base_convert",
    "base_convert_exact",
    "build_basis",
    "decompose",
    "reconstruct",
    "residue_count",
]


class RnsRangeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RnsBasis:
    """Ordered, pairwise co-prime moduli sharing one datapath width."""

    moduli: tuple[MontgomeryContext, ...]
    W: int = field(init=False)
    Q: int = field(init=False)
    qhat: tuple[int, ...] = field(init=False, repr=False)
    qhat_inv: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        ctxs = tuple(self.moduli)
        if not ctxs:
            raise ValueError("basis needs at least one modulus")
        widths = {c.width for c in ctxs}
        if len(widths) != 1:
            raise ValueError("all moduli must share one width")
        qs = [c.q for c in ctxs]
        for i in range(len(qs)):
            for j in range(i):
                if math.gcd(qs[i], qs[j]) != 1:
                    raise ValueError(f"moduli {qs[j]} and {qs[i]} are not co-prime")
        Q = math.prod(qs)
        qhat = tuple(Q // q for q in qs)
        set_ = object.__setattr__
        set_(self, "moduli", ctxs)
        set_(self, "W", widths.pop())
        set_(self, "Q", Q)
        set_(self, "qhat", qhat)
        set_(self, "qhat_inv", tuple(pow(h % q, -1, q) for h, q in zip(qhat, qs)))

    @classmethod
    def from_primes(cls, primes, width: int) -> "RnsBasis":
        return cls(tuple(MontgomeryContext(int(p), width) for p in primes))

    @property
    def k(self) -> int:
        return len(self.moduli)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(c.q for c in self.moduli)

    @property
    def Q_decimal(self) -> str:
        return str(self.Q)

    @cached_property
    def mset(self) -> ModulusSet:
        return ModulusSet(self.moduli)

    @cached_property
    def qhat_inv_mont(self) -> np.ndarray:
        """CRT constants ``(Q/q_i)^-1 mod q_i`` in Montgomery form."""
        r = 1 << self.mset.rbits
        return self.mset.const([v * r % q for v, q in zip(self.qhat_inv, self.primes)])

    def prefix(self, length: int) -> "RnsBasis":
        return _prefix(self, length)

    def __len__(self):
        return self.k

    def __eq__(self, other):
        return isinstance(other, RnsBasis) and self.moduli == other.moduli

    def __hash__(self):
        return hash(self.moduli)

    def __add__(self, other: "RnsBasis") -> "RnsBasis":
        return RnsBasis(self.moduli + other.moduli)


_PREFIX_CACHE: dict[tuple, RnsBasis] = {}


def _prefix(basis: RnsBasis, length: int) -> RnsBasis:
    if not 1 <= length <= basis.k:
        raise ValueError(f"prefix length {length} outside 1..{basis.k}")
    if length == basis.k:
        return basis
    key = basis.moduli[:length]
    b = _PREFIX_CACHE.get(key)
    if b is None:
        b = _PREFIX_CACHE[key] = RnsBasis(key)
    return b


def residue_count(Q_target_bits: int, W: int) -> int:
    return -(-Q_target_bits // (W - GUARD_BITS))


def build_basis(Q_target_bits: int, W: int, N: int) -> RnsBasis:
    """``ceil(Q/(W-2))`` of the largest ``(W-2)``-bit primes that are 1 mod ``2N``."""
    usable = W - GUARD_BITS
    if Q_target_bits < usable:
        raise ValueError(f"Q_target_bits={Q_target_bits} is below the usable width {usable}")
    if N < 1 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    k = residue_count(Q_target_bits, W)
    return RnsBasis.from_primes(ntt_primes_below(usable, N, k), W)


def _to_int(x) -> int:
    if isinstance(x, str):
        s = x.strip()
        if not s.isdigit():
            raise ValueError(f"not a decimal integer: {x!r}")
        return int(s)
    return int(x)


def decompose(x, basis: RnsBasis) -> list[int]:
    """Residues of ``x`` (decimal string or int) modulo each basis prime."""
    v = _to_int(x)
    if not 0 <= v < basis.Q:
        raise RnsRangeError("value outside [0, Q)")
    return [v % q for q in basis.primes]


def _check_residues(residues, basis: RnsBasis) -> list[int]:
    rs = [int(r) for r in residues]
    if len(rs) != basis.k:
        raise ValueError(f"expected {basis.k} residues, got {len(rs)}")
    for r, q in zip(rs, basis.primes):
        if not 0 <= r < q:
            raise RnsRangeError(f"residue {r} not below modulus {q}")
    return rs


def _crt(rs: list[int], basis: RnsBasis) -> int:
    return sum(r * inv % q * h for r, inv, q, h in zip(rs, basis.qhat_inv, basis.primes, basis.qhat)) % basis.Q


def reconstruct(residues, basis: RnsBasis) -> str:
    """CRT reconstruction; returns the unique value in ``[0, Q)`` as a decimal string."""
    return str(_crt(_check_residues(residues, basis), basis))


def base_convert(residues, from_basis: RnsBasis, to_basis: RnsBasis) -> list[int]:
    """Fast conversion: ``sum_i [r_i * qhat_i^-1]_{q_i} * qhat_i`` reduced per target prime.

    The result represents ``x + e*Q`` for some ``0 <= e < k``.
    """
    rs = _check_residues(residues, from_basis)
    ys = [r * inv % q for r, inv, q in zip(rs, from_basis.qhat_inv, from_basis.primes)]
    return [sum(y * (h % p) for y, h in zip(ys, from_basis.qhat)) % p for p in to_basis.primes]


def base_convert_exact(residues, from_basis: RnsBasis, to_basis: RnsBasis) -> list[int]:
    x = _crt(_check_residues(residues, from_basis), from_basis)
    return [x % p for p in to_basis.primes]


class BaseConverter:
    """Fast base conversion on Montgomery-form ``(k, N)`` arrays.

    Step one multiplies row ``i`` by the plain constant ``qhat_i^-1`` which
    strips the Montgomery factor and leaves ``y_i = [x_i qhat_i^-1]_{q_i}``.
    Step two accumulates ``y_i * C_ij`` with ``C_ij = (qhat_i mod p_j) R^2``,
    whose Montgomery product puts the target rows back in Montgomery form.
    ``post`` optionally scales the step-two constants, e.g. by ``P^-1``.

    With ``centered`` (the default) each ``y_i`` is read as a signed value in
    ``(-q_i/2, q_i/2]``: every target row subtracts ``c * Q`` where ``c``
    counts the lifted rows, so the conversion error ``e*Q`` has
    ``|e| <= k/2`` and mean close to zero instead of ``0 <= e < k``.
    """

    def __init__(self, from_basis: RnsBasis, to_basis: RnsBasis, post: list[int] | None = None,
                 centered: bool = True):
        self.src = from_basis
        self.dst = to_basis
        self.centered = centered
        ms, md = from_basis.mset, to_basis.mset
        if ms.dtype != md.dtype or ms.rbits != md.rbits:
            raise ValueError("source and target bases must share a datapath width")
        r = 1 << md.rbits
        post = post or [1] * to_basis.k
        self.step1 = ms.const(from_basis.qhat_inv)
        self.consts = np.array(
            [[(h % p) * c % p * r % p * r % p for p, c in zip(to_basis.primes, post)] for h in from_basis.qhat],
            dtype=md.dtype,
        )
        Q = from_basis.Q
        # lift[j, c] = c * Q * post_j in Montgomery form
        self.lift = np.array(
            [[c * Q % p * pc % p * r % p for c in range(from_basis.k + 1)] for p, pc in zip(to_basis.primes, post)],
            dtype=md.dtype,
        )
        self.half = ms.const([q // 2 for q in from_basis.primes])

    def apply(self, x: np.ndarray, prescaled: bool = False) -> np.ndarray:
        """Convert ``x``; with ``prescaled`` the rows already hold plain ``y_i``."""
        ms, md = self.src.mset, self.dst.mset
        k, n = x.shape
        L = self.dst.k
        if k != self.src.k:
            raise ValueError(f"expected {self.src.k} rows, got {k}")
        if prescaled:
            y = x
        else:
            y = ms.mul_const(x, self.step1)
            record("mod_mult", k)
        out = md.zeros(n)
        for i in range(k):
            term = md.mul_const(np.broadcast_to(y[i], (L, n)), self.consts[i])
            out = term if i == 0 else md.add(out, term)
        record("mod_mult", k * L)
        record("mod_add", (k - 1) * L)
        if self.centered:
            cnt = np.count_nonzero(y > self.half[:, None], axis=0)
            corr = np.take_along_axis(self.lift, np.broadcast_to(cnt, (L, n)), axis=1)
            out = md.sub(out, corr)
            record("mod_add", L)
        record("base_conv", L)
        return out
