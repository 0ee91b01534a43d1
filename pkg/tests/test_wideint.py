import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhesim.wideint import (
    CAPACITIES,
    CapacityError,
    WideUInt,
    add_with_carry,
    compare,
    kernels,
    mul_full,
    sub_with_borrow,
)

caps = st.sampled_from([64, 256, 512, 1024])


@st.composite
def pairs(draw):
    bits = draw(caps)
    v = st.integers(0, (1 << bits) - 1)
    return bits, draw(v), draw(v)


@settings(max_examples=300, deadline=None)
@given(pairs())
def test_add_sub_match_int(p):
    bits, x, y = p
    a, b = WideUInt.from_int(x, bits), WideUInt.from_int(y, bits)
    s, carry = add_with_carry(a, b)
    assert int(s) + (carry << bits) == x + y
    d, borrow = sub_with_borrow(a, b)
    assert int(d) - (borrow << bits) == x - y


@settings(max_examples=300, deadline=None)
@given(pairs())
def test_mul_full_is_exact_and_doubles_capacity(p):
    bits, x, y = p
    prod = mul_full(WideUInt.from_int(x, bits), WideUInt.from_int(y, bits))
    assert prod.capacity_bits == 2 * bits
    assert int(prod) == x * y


@settings(max_examples=200, deadline=None)
@given(pairs())
def test_compare_and_ordering(p):
    bits, x, y = p
    a, b = WideUInt.from_int(x, bits), WideUInt.from_int(y, bits)
    assert compare(a, b) == (x > y) - (x < y)
    assert (a < b) == (x < y)
    assert (a == b) == (x == y)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, (1 << 512) - 1))
def test_string_round_trips(x):
    w = WideUInt.from_int(x, 512)
    assert WideUInt.from_decimal_string(w.to_decimal_string(), 512) == w
    assert WideUInt.from_hex_string(w.to_hex_string(), 512) == w
    assert w.bit_length() == x.bit_length()


def test_carry_and_borrow_edges():
    top = WideUInt.from_int((1 << 512) - 1, 512)
    one = WideUInt.from_int(1, 512)
    s, c = add_with_carry(top, one)
    assert int(s) == 0 and c == 1
    d, b = sub_with_borrow(WideUInt.zero(512), one)
    assert int(d) == (1 << 512) - 1 and b == 1


def test_capacity_errors():
    with pytest.raises(CapacityError):
        WideUInt.from_int(1 << 64, 64)
    with pytest.raises(CapacityError):
        WideUInt.from_int(1, 96)
    with pytest.raises(CapacityError):
        add_with_carry(WideUInt.from_int(1, 64), WideUInt.from_int(1, 128))
    with pytest.raises(CapacityError):
        mul_full(WideUInt.from_int(1, CAPACITIES[-1]), WideUInt.from_int(1, CAPACITIES[-1]))
    with pytest.raises(ValueError):
        WideUInt.from_decimal_string("12a", 64)
    with pytest.raises(ValueError):
        WideUInt.from_hex_string("0xff", 64)
    with pytest.raises(ValueError):
        WideUInt.from_int(-1, 64)


def test_resize_and_shifts():
    w = WideUInt.from_int(0xDEADBEEF, 64)
    assert int(w.resize(256)) == 0xDEADBEEF
    with pytest.raises(CapacityError):
        WideUInt.from_int(1 << 100, 128).resize(64)
    assert int(w.shift_left(40)) == (0xDEADBEEF << 40) & ((1 << 64) - 1)
    assert int(w.shift_right(4)) == 0xDEADBEE
    assert w.bit_at(0) == 1 and w.bit_at(4) == 0


def test_limbs_are_read_only():
    w = WideUInt.from_int(5, 64)
    with pytest.raises(ValueError):
        w.limbs[0] = 1


def test_numba_and_numpy_kernels_agree():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 1 << 32, (50, 16), dtype=np.uint64).astype(np.uint32)
    b = rng.integers(0, 1 << 32, (50, 16), dtype=np.uint64).astype(np.uint32)
    for nb, npf, width in ((kernels.add_nb, kernels.add_np, 16), (kernels.sub_nb, kernels.sub_np, 16),
                           (kernels.mul_nb, kernels.mul_np, 32)):
        o1 = np.zeros((50, width), np.uint32)
        o2 = np.zeros((50, width), np.uint32)
        r1, r2 = nb(a, b, o1), npf(a, b, o2)
        assert np.array_equal(o1, o2)
        if r1 is not None:
            assert np.array_equal(np.asarray(r1), np.asarray(r2))
