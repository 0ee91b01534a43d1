import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhesim.census import census
from fhesim.modarith import MontgomeryContext, find_ntt_prime
from fhesim.ntt import (
    TrafficMeter,
    bit_reverse,
    get_tables,
    intt_direct,
    intt_four_step,
    ntt_direct,
    ntt_four_step,
    pointwise_mul,
)
from fhesim.ntt import kernels as nk


def tables(width, N, idx=0):
    return get_tables(MontgomeryContext(find_ntt_prime(width, N, idx), width), N)


def evaluate(a, q, psi, N):
    """Direct polynomial evaluation at the bit-reversed odd powers of psi."""
    bits = N.bit_length() - 1
    out = []
    for i in range(N):
        x = pow(psi, 2 * bit_reverse(i, bits) + 1, q)
        out.append(sum(c * pow(x, j, q) for j, c in enumerate(a)) % q)
    return out


def negacyclic(a, b, q):
    n = len(a)
    out = [0] * n
    for i in range(n):
        for j in range(n):
            s = a[i] * b[j]
            if i + j < n:
                out[i + j] += s
            else:
                out[i + j - n] -= s
    return [v % q for v in out]


@pytest.mark.parametrize("width,N", [(32, 8), (64, 16), (512, 16), (64, 32)])
def test_matches_direct_evaluation(width, N):
    t = tables(width, N)
    rng = np.random.default_rng(N)
    a = [int(v) % t.q for v in rng.integers(0, 1 << 62, N)]
    assert [int(v) for v in ntt_direct(a, t)] == evaluate(a, t.q, t.psi, N)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([32, 64, 512]), st.sampled_from([8, 16, 32, 64]), st.integers(0, 2**32))
def test_convolution_theorem(width, N, seed):
    t = tables(width, N)
    rng = np.random.default_rng(seed)
    a = [int(v) % t.q for v in rng.integers(0, 1 << 62, N)]
    b = [int(v) % t.q for v in rng.integers(0, 1 << 62, N)]
    prod = intt_direct(pointwise_mul(ntt_direct(a, t), ntt_direct(b, t), t), t)
    r = (1 << t.mset.rbits) % t.q
    assert [int(v) * r % t.q for v in prod] == negacyclic(a, b, t.q)


@pytest.mark.parametrize("N", [16, 256, 1024])
def test_four_step_equals_direct_and_inverts(N):
    t = tables(64, N)
    rng = np.random.default_rng(1)
    a = rng.integers(0, t.q, N, dtype=np.uint64)
    meter = TrafficMeter()
    F = ntt_four_step(a, t, meter)
    assert np.array_equal(F, ntt_direct(a, t))
    assert np.array_equal(intt_four_step(F, t), a)
    assert np.array_equal(intt_direct(F, t), a)
    assert meter.transpose_moves > 0 and 0 < meter.strided_share < 1


def test_four_step_rejects_odd_log():
    with pytest.raises(ValueError):
        ntt_four_step([0] * 32, tables(64, 32))


def test_census_records_transforms():
    t = tables(64, 16)
    with census() as c:
        ntt_direct([1] * 16, t)
        intt_direct([1] * 16, t)
    assert c["ntt"] == 1 and c["intt"] == 1


def test_numba_and_numpy_butterflies_agree():
    t = tables(64, 256)
    m = t.mset
    rng = np.random.default_rng(9)
    a = rng.integers(0, t.q, (3, 256), dtype=np.uint64)
    tw = np.repeat(t.forward_twiddles, 3, axis=0)
    itw = np.repeat(t.inverse_twiddles, 3, axis=0)
    sc = np.repeat(t.n_inv, 3)
    x, y = a.copy(), a.copy()
    q = np.broadcast_to(m.q, (3,)).copy()
    qi = np.broadcast_to(m.qinv, (3,)).copy()
    nk.ct_forward_nb(x, tw, q, qi, m.rbits)
    nk.ct_forward_np(y, tw, q, qi, m.rbits)
    assert np.array_equal(x, y)
    nk.gs_inverse_nb(x, itw, sc, q, qi, m.rbits)
    nk.gs_inverse_np(y, itw, sc, q, qi, m.rbits)
    assert np.array_equal(x, y) and np.array_equal(x, a)
