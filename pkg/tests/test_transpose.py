import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhesim.transpose import (
    MatrixView,
    TuHierarchy,
    base_case_permutation,
    transpose_naive,
    transpose_recursive,
)
from fhesim.transpose import kernels as tk


def test_base_case_permutation():
    assert [base_case_permutation(i) for i in range(4)] == [0, 2, 1, 3]
    with pytest.raises(ValueError):
        base_case_permutation(4)


def test_two_by_two_swaps_off_diagonal():
    m, rep = transpose_recursive(MatrixView(np.array([10, 11, 12, 13]), 2))
    assert m.backing.tolist() == [10, 12, 11, 13]
    assert rep.total_moves == 2


@pytest.mark.parametrize("side", [2, 4, 8, 16])
def test_exhaustive_small_sides_against_naive(side):
    data = np.arange(side * side, dtype=np.int64)
    for banks, subs in itertools.product((1, 2, 4, 16, 512), (1, 2, 4)):
        m = MatrixView(data.copy(), side)
        got, _ = transpose_recursive(m, TuHierarchy(bank_count=banks, subarrays_per_bank=subs))
        assert np.array_equal(got.backing, transpose_naive(MatrixView(data, side)).backing)
        assert np.array_equal(got.as_2d(), data.reshape(side, side).T)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([32, 64, 256]))
def test_random_large_against_naive(seed, side):
    data = np.random.default_rng(seed).integers(0, 1 << 63, side * side, dtype=np.uint64)
    got, _ = transpose_recursive(MatrixView(data.copy(), side))
    assert np.array_equal(got.backing, transpose_naive(MatrixView(data, side)).backing)


def test_involution_and_traffic_accounting():
    side = 64
    data = np.arange(side * side, dtype=np.uint64)
    tu = TuHierarchy(bank_count=16)
    m = MatrixView(data.copy(), side)
    _, r1 = transpose_recursive(m, tu)
    _, r2 = transpose_recursive(m, tu)
    assert np.array_equal(m.backing, data)
    assert r1 == r2
    # each recursion level swaps the two off-diagonal quadrants: half the elements
    assert r1.total_moves == side * side // 2 * 6
    assert tu.level_moves == (2 * r1.level1, 2 * r1.level2, 2 * r1.level3)


def test_more_banks_push_moves_outward():
    side = 256
    a = transpose_recursive(MatrixView(np.zeros(side * side, np.uint64), side), TuHierarchy(bank_count=1))[1]
    b = transpose_recursive(MatrixView(np.zeros(side * side, np.uint64), side), TuHierarchy(bank_count=512))[1]
    assert a.level3 == 0 and b.level3 > 0
    assert a.total_moves == b.total_moves == side * side // 2 * 8


def test_invalid_inputs():
    with pytest.raises(ValueError):
        MatrixView(np.zeros(10), 3)
    with pytest.raises(ValueError):
        transpose_recursive(MatrixView(np.zeros(9), 3))
    with pytest.raises(ValueError):
        TuHierarchy(bank_count=0)


def test_backends_agree():
    side = 128
    data = np.random.default_rng(0).integers(0, 1 << 60, side * side, dtype=np.uint64)
    per_bank, per_sub = TuHierarchy(bank_count=64).placement(side)
    x, y = data.copy(), data.copy()
    c1, c2 = np.zeros(4, np.int64), np.zeros(4, np.int64)
    tk.transpose_nb(x, side, per_bank, per_sub, c1)
    tk.transpose_np(y, side, per_bank, per_sub, c2)
    assert np.array_equal(x, y) and np.array_equal(c1, c2)
