import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhesim.modarith import (
    ContextMismatch,
    ModulusSet,
    MontgomeryContext,
    find_ntt_prime,
    from_montgomery,
    is_probable_prime,
    mod_add,
    mod_inverse,
    mod_mul,
    mod_neg,
    mod_pow,
    mod_sub,
    montgomery_reduce,
    ntt_primes_above,
    ntt_primes_below,
    primitive_2n_root,
    reduce_ints,
    to_montgomery,
)
from fhesim.modarith import vector
from fhesim.wideint import WideUInt

WIDTHS = (32, 64, 128, 512)
CTX = {w: MontgomeryContext(find_ntt_prime(w, 16, 0), w) for w in WIDTHS}


@st.composite
def ctx_and_t(draw):
    ctx = CTX[draw(st.sampled_from(WIDTHS))]
    return ctx, draw(st.integers(0, (ctx.q << ctx.width) - 1))


@settings(max_examples=400, deadline=None)
@given(ctx_and_t())
def test_montgomery_reduce_matches_oracle(p):
    ctx, t = p
    got = montgomery_reduce(ctx, WideUInt.from_int(t, 2 * ctx.capacity_bits))
    assert int(got) == t * pow(1 << ctx.width, -1, ctx.q) % ctx.q


@st.composite
def ctx_and_pair(draw):
    ctx = CTX[draw(st.sampled_from(WIDTHS))]
    v = st.integers(0, ctx.q - 1)
    return ctx, draw(v), draw(v)


@settings(max_examples=300, deadline=None)
@given(ctx_and_pair())
def test_field_ops_match_int(p):
    ctx, x, y = p
    q = ctx.q
    a, b = to_montgomery(ctx, x), to_montgomery(ctx, y)
    assert from_montgomery(a) == x
    assert int(mod_add(a, b)) == (x + y) % q
    assert int(mod_sub(a, b)) == (x - y) % q
    assert int(mod_neg(a)) == (-x) % q
    assert int(mod_mul(a, b)) == x * y % q
    assert int(a * b + a) == (x * y + x) % q
    assert int(mod_pow(a, 5)) == pow(x, 5, q)
    if x:
        assert int(mod_inverse(a)) == pow(x, -1, q)
        assert int(mod_pow(a, -3)) == pow(x, -3, q)


def test_reduce_precondition_and_context_errors():
    ctx = CTX[64]
    with pytest.raises(ValueError):
        reduce_ints(ctx, [ctx.q << ctx.width])
    with pytest.raises(ValueError):
        montgomery_reduce(ctx, WideUInt.from_int(1, 64))
    with pytest.raises(ContextMismatch):
        mod_add(to_montgomery(CTX[64], 1), to_montgomery(MontgomeryContext(find_ntt_prime(64, 16, 1), 64), 1))
    with pytest.raises(ValueError):
        mod_inverse(to_montgomery(ctx, 0))


def test_context_validation():
    with pytest.raises(ValueError):
        MontgomeryContext(10, 64)
    with pytest.raises(ValueError):
        MontgomeryContext((1 << 63) - 25, 64)  # needs 63 bits on a 64-bit path
    with pytest.raises(ValueError):
        MontgomeryContext(97, 48)


def test_prime_search():
    for w, n in ((32, 4096), (64, 65536), (512, 1024)):
        qs = [find_ntt_prime(w, n, i) for i in range(3)]
        assert len(set(qs)) == 3 and qs == sorted(qs, reverse=True)
        for q in qs:
            assert q.bit_length() == w - 2 and q % (2 * n) == 1 and is_probable_prime(q)
            psi = primitive_2n_root(q, n)
            assert pow(psi, n, q) == q - 1
    assert ntt_primes_below(30, 1024, 2) == (find_ntt_prime(32, 1024, 0), find_ntt_prime(32, 1024, 1))
    above = ntt_primes_above(40, 4096, 3)
    assert all(p > 1 << 40 and p % 8192 == 1 for p in above)
    assert [n for n in range(2, 60) if is_probable_prime(n)] == [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
    assert not is_probable_prime(561) and not is_probable_prime((1 << 61) + 1)
    assert is_probable_prime((1 << 61) - 1)


@pytest.mark.parametrize("width", [32, 64, 512])
def test_modulus_set_vector_ops(width):
    ctxs = [MontgomeryContext(find_ntt_prime(width, 64, i), width) for i in range(3)]
    ms = ModulusSet(ctxs)
    rng = np.random.default_rng(width)
    rows = [[int(rng.integers(0, 1 << 62)) % c.q for _ in range(32)] for c in ctxs]
    other = [[int(rng.integers(0, 1 << 62)) % c.q for _ in range(32)] for c in ctxs]
    a, b = ms.array(rows), ms.array(other)
    r = 1 << ms.rbits
    prod = ms.mul(a, b)
    for i, c in enumerate(ctxs):
        rinv = pow(r, -1, c.q)
        assert [int(v) for v in prod[i]] == [x * y * rinv % c.q for x, y in zip(rows[i], other[i])]
        assert [int(v) for v in ms.add(a, b)[i]] == [(x + y) % c.q for x, y in zip(rows[i], other[i])]
        assert [int(v) for v in ms.sub(a, b)[i]] == [(x - y) % c.q for x, y in zip(rows[i], other[i])]


def test_vector_backends_agree():
    ctxs = [MontgomeryContext(find_ntt_prime(w, 64, 0), w) for w in (32, 64)]
    rng = np.random.default_rng(5)
    for c in ctxs:
        ms = ModulusSet([c])
        a = rng.integers(0, c.q, (1, 500), dtype=np.uint64)
        b = rng.integers(0, c.q, (1, 500), dtype=np.uint64)
        o1, o2 = np.empty_like(a), np.empty_like(a)
        vector.mont_mul_nb(a, b, ms.q, ms.qinv, ms.rbits, o1)
        vector.mont_mul_np(a, b, ms.q, ms.qinv, ms.rbits, o2)
        assert np.array_equal(o1, o2)
