"""Fixed-capacity multi-limb unsigned integers.

``WideUInt`` stores its value as 32-bit limbs (least significant first) with a
capacity fixed at construction.  Arithmetic never changes capacity silently:
``add_with_carry`` and ``sub_with_borrow`` return the out-going carry/borrow and
``mul_full`` returns a double-capacity product.
"""
from __future__ import annotations

from functools import total_ordering

import numpy as np

from . import kernels
from .kernels import LIMB_BITS, ints_to_limbs, limbs_to_ints

CAPACITIES = (64, 128, 256, 512, 1024, 2048)

__all__ = [
    "CAPACITIES",
    "LIMB_BITS",
    "WideUInt",
    "CapacityError",
    "add_with_carry",
    "sub_with_borrow",
    "mul_full",
    "compare",
    "kernels",
]


class CapacityError(ValueError):
    """Operands disagree on capacity, or a value does not fit."""


def _check_capacity(bits: int) -> int:
    if bits not in CAPACITIES:
        raise CapacityError(f"capacity must be one of {CAPACITIES}, got {bits}")
    return bits


@total_ordering
class WideUInt:
    __slots__ = ("_limbs", "_bits")

    def __init__(self, limbs, capacity_bits: int):
        _check_capacity(capacity_bits)
        arr = np.array(limbs, dtype=np.uint32).reshape(-1)
        n = capacity_bits // LIMB_BITS
        if arr.size != n:
            raise CapacityError(f"expected {n} limbs for {capacity_bits} bits, got {arr.size}")
        arr.setflags(write=False)
        self._limbs = arr
        self._bits = capacity_bits

    # -- construction -------------------------------------------------------
    @classmethod
    def from_int(cls, value: int, capacity_bits: int) -> "WideUInt":
        _check_capacity(capacity_bits)
        if value < 0:
            raise ValueError("WideUInt is unsigned")
        if value.bit_length() > capacity_bits:
            raise CapacityError(f"{value.bit_length()}-bit value exceeds {capacity_bits}-bit capacity")
        return cls(ints_to_limbs([value], capacity_bits // LIMB_BITS)[0], capacity_bits)

    @classmethod
    def zero(cls, capacity_bits: int) -> "WideUInt":
        return cls(np.zeros(capacity_bits // LIMB_BITS, np.uint32), capacity_bits)

    @classmethod
    def from_decimal_string(cls, text: str, capacity_bits: int) -> "WideUInt":
        s = text.strip()
        if not s or not s.isdigit() or not s.isascii():
            raise ValueError(f"malformed decimal string: {text!r}")
        return cls.from_int(int(s), capacity_bits)

    @classmethod
    def from_hex_string(cls, text: str, capacity_bits: int) -> "WideUInt":
        s = text.strip()
        if not s or any(ch not in "0123456789abcdef" for ch in s):
            raise ValueError(f"malformed hex string (lowercase, no prefix): {text!r}")
        return cls.from_int(int(s, 16), capacity_bits)

    # -- views ----------------------------------------------------------------
    @property
    def limbs(self) -> np.ndarray:
        return self._limbs

    @property
    def capacity_bits(self) -> int:
        return self._bits

    def __int__(self) -> int:
        return limbs_to_ints(self._limbs[None, :])[0]

    to_int = __int__

    def to_decimal_string(self) -> str:
        return str(int(self))

    def to_hex_string(self) -> str:
        return format(int(self), "x")

    def bit_length(self) -> int:
        nz = np.flatnonzero(self._limbs)
        if nz.size == 0:
            return 0
        top = int(nz[-1])
        return top * LIMB_BITS + int(self._limbs[top]).bit_length()

    def bit_at(self, index: int) -> int:
        if not 0 <= index < self._bits:
            raise IndexError(f"bit {index} outside capacity {self._bits}")
        return int(self._limbs[index // LIMB_BITS] >> np.uint32(index % LIMB_BITS)) & 1

    def resize(self, capacity_bits: int) -> "WideUInt":
        """Zero-extend or narrow; narrowing a value that does not fit raises."""
        _check_capacity(capacity_bits)
        n = capacity_bits // LIMB_BITS
        if n >= self._limbs.size:
            out = np.zeros(n, np.uint32)
            out[: self._limbs.size] = self._limbs
            return WideUInt(out, capacity_bits)
        if self._limbs[n:].any():
            raise CapacityError(f"value does not fit in {capacity_bits} bits")
        return WideUInt(self._limbs[:n].copy(), capacity_bits)

    # -- shifts ---------------------------------------------------------------
    def shift_left(self, count: int) -> "WideUInt":
        """Logical shift; bits pushed past capacity are discarded."""
        if count < 0:
            raise ValueError("negative shift")
        mask = (1 << self._bits) - 1
        return WideUInt.from_int((int(self) << count) & mask, self._bits)

    def shift_right(self, count: int) -> "WideUInt":
        if count < 0:
            raise ValueError("negative shift")
        return WideUInt.from_int(int(self) >> count, self._bits)

    # -- comparison -----------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, WideUInt):
            return NotImplemented
        return self._bits == other._bits and bool(np.array_equal(self._limbs, other._limbs))

    def __lt__(self, other):
        if not isinstance(other, WideUInt):
            return NotImplemented
        return compare(self, other) < 0

    def __hash__(self):
        return hash((self._bits, self._limbs.tobytes()))

    def __repr__(self):
        return f"WideUInt(0x{self.to_hex_string()}, capacity_bits={self._bits})"

    # operator sugar; carries are dropped, which matches arithmetic mod 2**capacity
    def __add__(self, other):
        return add_with_carry(self, other)[0]

    def __sub__(self, other):
        return sub_with_borrow(self, other)[0]

    def __mul__(self, other):
        return mul_full(self, other)


def _same(a: WideUInt, b: WideUInt) -> None:
    if a.capacity_bits != b.capacity_bits:
        raise CapacityError(f"capacity mismatch: {a.capacity_bits} vs {b.capacity_bits}")


def add_with_carry(a: WideUInt, b: WideUInt) -> tuple[WideUInt, int]:
    _same(a, b)
    out = np.empty((1, a.limbs.size), np.uint32)
    carry = kernels.add_limbs(a.limbs[None, :], b.limbs[None, :], out)
    return WideUInt(out[0], a.capacity_bits), int(carry[0])


def sub_with_borrow(a: WideUInt, b: WideUInt) -> tuple[WideUInt, int]:
    _same(a, b)
    out = np.empty((1, a.limbs.size), np.uint32)
    borrow = kernels.sub_limbs(a.limbs[None, :], b.limbs[None, :], out)
    return WideUInt(out[0], a.capacity_bits), int(borrow[0])


def mul_full(a: WideUInt, b: WideUInt) -> WideUInt:
    _same(a, b)
    if a.capacity_bits * 2 > CAPACITIES[-1]:
        raise CapacityError(f"no double-width capacity above {a.capacity_bits} bits")
    out = np.empty((1, 2 * a.limbs.size), np.uint32)
    kernels.mul_limbs(a.limbs[None, :], b.limbs[None, :], out)
    return WideUInt(out[0], 2 * a.capacity_bits)


def compare(a: WideUInt, b: WideUInt) -> int:
    _same(a, b)
    diff = np.flatnonzero(a.limbs != b.limbs)
    if diff.size == 0:
        return 0
    top = diff[-1]
    return 1 if a.limbs[top] > b.limbs[top] else -1
