"""Montgomery contexts and scalar modular arithmetic on ``WideUInt`` residues.

Reduction follows the word-serial algorithm: for each 32-bit word of the
operand, one multiply-add ``t += m * q << (32*i)`` clears the low word.  A final
conditional subtraction brings the result into ``[0, q)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..wideint import CAPACITIES, LIMB_BITS, WideUInt, add_with_carry, compare, mul_full, sub_with_borrow
from ..wideint.kernels import ints_to_limbs, limbs_to_ints, redc_limbs

GUARD_BITS = 2


class ContextMismatch(ValueError):
    """Operands belong to different Montgomery contexts."""


def _capacity_for(width: int) -> int:
    for cap in CAPACITIES:
        if cap >= width:
            return cap
    raise ValueError(f"width {width} exceeds the largest capacity")


@dataclass(frozen=True, eq=False)
class MontgomeryContext:
    q: int
    width: int
    capacity_bits: int = field(init=False)
    q_wide: WideUInt = field(init=False, repr=False)
    q_inv_neg: WideUInt = field(init=False, repr=False)  # -q^-1 mod 2**32
    q_inv_neg_full: int = field(init=False, repr=False)  # -q^-1 mod R
    r_mod_q: WideUInt = field(init=False, repr=False)
    r2_mod_q: WideUInt = field(init=False, repr=False)

    def __post_init__(self):
        q, w = int(self.q), int(self.width)
        if w % LIMB_BITS or w < LIMB_BITS or w > CAPACITIES[-2]:
            raise ValueError(f"width must be a multiple of {LIMB_BITS} up to {CAPACITIES[-2]}, got {w}")
        if q < 3 or q % 2 == 0:
            raise ValueError(f"modulus must be odd and >= 3, got {q}")
        if q.bit_length() > w - GUARD_BITS:
            raise ValueError(f"modulus needs {q.bit_length()} bits; a {w}-bit path allows {w - GUARD_BITS}")
        cap = _capacity_for(w)
        set_ = object.__setattr__
        set_(self, "q", q)
        set_(self, "width", w)
        set_(self, "capacity_bits", cap)
        set_(self, "q_wide", WideUInt.from_int(q, cap))
        chunk = 1 << LIMB_BITS
        set_(self, "q_inv_neg", WideUInt.from_int((-pow(q, -1, chunk)) % chunk, cap))
        r = 1 << w
        set_(self, "q_inv_neg_full", (-pow(q, -1, r)) % r)
        set_(self, "r_mod_q", WideUInt.from_int(r % q, cap))
        set_(self, "r2_mod_q", WideUInt.from_int(r * r % q, cap))

    @property
    def r(self) -> int:
        return 1 << self.width

    @property
    def n_words(self) -> int:
        return self.width // LIMB_BITS

    def __eq__(self, other):
        return isinstance(other, MontgomeryContext) and (self.q, self.width) == (other.q, other.width)

    def __hash__(self):
        return hash((self.q, self.width))

    # convenience for callers that work with plain ints
    def to_mont_int(self, x: int) -> int:
        return (x % self.q) * self.r % self.q

    def from_mont_int(self, x: int) -> int:
        return x * pow(self.r, -1, self.q) % self.q


def montgomery_reduce(ctx: MontgomeryContext, t: WideUInt) -> WideUInt:
    """Return ``t * R^-1 mod q`` for a double-capacity ``t < q * R``."""
    if t.capacity_bits != 2 * ctx.capacity_bits:
        raise ValueError(f"expected a {2 * ctx.capacity_bits}-bit operand, got {t.capacity_bits}")
    if int(t) >= ctx.q << ctx.width:
        raise ValueError("montgomery_reduce requires t < q * R")
    out = montgomery_reduce_batch(ctx, t.limbs[None, :])
    return WideUInt(out[0], ctx.capacity_bits)


def montgomery_reduce_batch(ctx: MontgomeryContext, t_limbs: np.ndarray) -> np.ndarray:
    """Row-wise reduction of a ``(batch, 2*capacity/32)`` limb array.

    The caller guarantees every row is below ``q * R``.
    """
    rows, tl = t_limbs.shape
    scratch = np.zeros((rows, max(tl, 2 * ctx.n_words) + 1), np.uint32)
    scratch[:, :tl] = t_limbs
    out = np.empty((rows, ctx.capacity_bits // LIMB_BITS), np.uint32)
    redc_limbs(scratch, ctx.q_wide.limbs, np.uint32(ctx.q_inv_neg.limbs[0]), ctx.n_words, out)
    return out


def reduce_ints(ctx: MontgomeryContext, values) -> list[int]:
    """Batch ``montgomery_reduce`` over Python ints (test/oracle helper)."""
    vals = list(values)
    limit = ctx.q << ctx.width
    if any(v < 0 or v >= limit for v in vals):
        raise ValueError("montgomery_reduce requires 0 <= t < q * R")
    limbs = ints_to_limbs(vals, 2 * ctx.capacity_bits // LIMB_BITS)
    return limbs_to_ints(montgomery_reduce_batch(ctx, limbs))


@dataclass(frozen=True)
class ModElement:
    """A residue in Montgomery form (``value = x * R mod q``)."""

    value: WideUInt
    ctx: MontgomeryContext

    def __post_init__(self):
        if self.value.capacity_bits != self.ctx.capacity_bits:
            raise ValueError("value capacity does not match its context")
        if compare(self.value, self.ctx.q_wide) >= 0:
            raise ValueError("ModElement value must be < q")

    def __add__(self, other):
        return mod_add(self, other)

    def __sub__(self, other):
        return mod_sub(self, other)

    def __mul__(self, other):
        return mod_mul(self, other)

    def __neg__(self):
        return mod_neg(self)

    def __int__(self):
        return from_montgomery(self)


def _same_ctx(a: ModElement, b: ModElement) -> MontgomeryContext:
    if a.ctx != b.ctx:
        raise ContextMismatch(f"q={a.ctx.q} vs q={b.ctx.q}")
    return a.ctx


def mod_add(a: ModElement, b: ModElement) -> ModElement:
    ctx = _same_ctx(a, b)
    s, carry = add_with_carry(a.value, b.value)
    if carry or compare(s, ctx.q_wide) >= 0:
        s, _ = sub_with_borrow(s, ctx.q_wide)
    return ModElement(s, ctx)


def mod_sub(a: ModElement, b: ModElement) -> ModElement:
    ctx = _same_ctx(a, b)
    d, borrow = sub_with_borrow(a.value, b.value)
    if borrow:
        d, _ = add_with_carry(d, ctx.q_wide)
    return ModElement(d, ctx)


def mod_neg(a: ModElement) -> ModElement:
    zero = ModElement(WideUInt.zero(a.ctx.capacity_bits), a.ctx)
    return mod_sub(zero, a)


def mod_mul(a: ModElement, b: ModElement) -> ModElement:
    """Montgomery product ``a * b * R^-1``: Montgomery form in, Montgomery form out."""
    ctx = _same_ctx(a, b)
    return ModElement(montgomery_reduce(ctx, mul_full(a.value, b.value)), ctx)


def to_montgomery(ctx: MontgomeryContext, x) -> ModElement:
    v = int(x) % ctx.q
    t = mul_full(WideUInt.from_int(v, ctx.capacity_bits), ctx.r2_mod_q)
    return ModElement(montgomery_reduce(ctx, t), ctx)


def from_montgomery(a: ModElement) -> int:
    t = a.value.resize(2 * a.ctx.capacity_bits)
    return int(montgomery_reduce(a.ctx, t))


def mod_pow(a: ModElement, exponent: int) -> ModElement:
    if exponent < 0:
        return mod_pow(mod_inverse(a), -exponent)
    result = ModElement(a.ctx.r_mod_q, a.ctx)
    base = a
    e = exponent
    while e:
        if e & 1:
            result = mod_mul(result, base)
        base = mod_mul(base, base)
        e >>= 1
    return result


def mod_inverse(a: ModElement) -> ModElement:
    x = from_montgomery(a)
    try:
        inv = pow(x, -1, a.ctx.q)
    except ValueError:
        raise ValueError(f"{x} is not invertible mod {a.ctx.q}") from None
    return to_montgomery(a.ctx, inv)
