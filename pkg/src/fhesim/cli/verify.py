"""Desk-scale oracle checks run by ``fhesim verify``.

Each suite returns ``(cases, failures)`` where ``failures`` lists short
descriptions of mismatches against an arbitrary-precision or naive oracle.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: list[str]
    seconds: float

    @property
    def ok(self) -> bool:
        return not self.failures


def _ints(rng: np.random.Generator, bits: int, n: int) -> list[int]:
    words = rng.integers(0, 1 << 32, size=(n, -(-bits // 32)), dtype=np.uint64)
    out = []
    for row in words:
        v = 0
        for w in row:
            v = (v << 32) | int(w)
        out.append(v & ((1 << bits) - 1))
    return out


def suite_wideint(rng, scale: int) -> tuple[int, list[str]]:
    from ..wideint import WideUInt, add_with_carry, compare, mul_full, sub_with_borrow

    fails, cases = [], 0
    for bits in (256, 512, 1024):
        xs, ys = _ints(rng, bits, 20 * scale), _ints(rng, bits, 20 * scale)
        mask = (1 << bits) - 1
        for x, y in zip(xs, ys):
            a, b = WideUInt.from_int(x, bits), WideUInt.from_int(y, bits)
            s, c = add_with_carry(a, b)
            d, br = sub_with_borrow(a, b)
            p = mul_full(a, b)
            cmp = compare(a, b)
            cases += 1
            if (int(s), c) != ((x + y) & mask, (x + y) >> bits):
                fails.append(f"add {bits}")
            if (int(d), br) != ((x - y) & mask, int(x < y)):
                fails.append(f"sub {bits}")
            if int(p) != x * y or p.capacity_bits != 2 * bits:
                fails.append(f"mul {bits}")
            if cmp != (x > y) - (x < y):
                fails.append(f"compare {bits}")
    return cases, fails


def suite_modarith(rng, scale: int) -> tuple[int, list[str]]:
    from ..modarith import MontgomeryContext, find_ntt_prime, reduce_ints

    fails, cases = [], 0
    for width in (32, 64, 512):
        for idx in range(3):
            q = find_ntt_prime(width, 16, idx)
            ctx = MontgomeryContext(q, width)
            limit = q << width
            ts = [t % limit for t in _ints(rng, limit.bit_length(), 200 * scale)]
            got = reduce_ints(ctx, ts)
            rinv = pow(1 << width, -1, q)
            bad = sum(g != t * rinv % q for g, t in zip(got, ts))
            cases += len(ts)
            if bad:
                fails.append(f"montgomery_reduce W={width} q#{idx}: {bad} mismatches")
    return cases, fails


def suite_rns(rng, scale: int) -> tuple[int, list[str]]:
    from ..rns import base_convert_exact, build_basis, decompose, reconstruct

    fails, cases = [], 0
    for width, qbits in ((32, 200), (64, 400), (512, 1536)):
        basis = build_basis(qbits, width, 16)
        other = build_basis(qbits // 2, width, 32)
        for x in _ints(rng, basis.Q.bit_length() + 8, 50 * scale):
            x %= basis.Q
            r = decompose(x, basis)
            cases += 1
            if int(reconstruct(r, basis)) != x:
                fails.append(f"round trip W={width}")
            if base_convert_exact(r, basis, other) != [x % q for q in other.primes]:
                fails.append(f"exact base conversion W={width}")
    return cases, fails


def _schoolbook(a, b, q):
    n = len(a)
    out = [0] * n
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if i + j < n:
                out[i + j] += x * y
            else:
                out[i + j - n] -= x * y
    return [v % q for v in out]


def suite_ntt(rng, scale: int) -> tuple[int, list[str]]:
    from ..modarith import MontgomeryContext, find_ntt_prime
    from ..ntt import get_tables, intt_direct, ntt_direct, ntt_four_step, pointwise_mul

    fails, cases = [], 0
    for width in (32, 64, 512):
        for N in (8, 16, 64, 256):
            q = find_ntt_prime(width, N, 0)
            t = get_tables(MontgomeryContext(q, width), N)
            for _ in range(scale):
                a = [x % q for x in _ints(rng, width, N)]
                b = [x % q for x in _ints(rng, width, N)]
                A = ntt_direct(a, t)
                cases += 1
                if [int(v) for v in intt_direct(A, t)] != a:
                    fails.append(f"round trip W={width} N={N}")
                if N <= 64:
                    # the pointwise product is a Montgomery product: it carries R^-1
                    prod = intt_direct(pointwise_mul(A, ntt_direct(b, t), t), t)
                    r = (1 << width) % q
                    if [int(v) * r % q for v in prod] != _schoolbook(a, b, q):
                        fails.append(f"convolution W={width} N={N}")
                if (N.bit_length() - 1) % 2 == 0:
                    if [int(v) for v in ntt_four_step(a, t)] != [int(v) for v in A]:
                        fails.append(f"four-step W={width} N={N}")
    return cases, fails


def suite_transpose(rng, scale: int) -> tuple[int, list[str]]:
    from ..transpose import (
        MatrixView,
        TuHierarchy,
        base_case_permutation,
        transpose_naive,
        transpose_recursive,
    )

    fails, cases = [], 0
    if [base_case_permutation(i) for i in range(4)] != [0, 2, 1, 3]:
        fails.append("2x2 base-case permutation")
    cases += 1
    sides = [2, 4, 8, 16, 32, 256]
    for side in sides:
        for banks in (1, 4, 16, 512):
            data = rng.integers(0, 1 << 62, side * side, dtype=np.uint64)
            m = MatrixView(data.copy(), side)
            want = transpose_naive(MatrixView(data.copy(), side)).backing
            got, _ = transpose_recursive(m, TuHierarchy(bank_count=banks))
            cases += 1
            if not np.array_equal(got.backing, want):
                fails.append(f"transpose side={side} banks={banks}")
    return cases, fails


def suite_fheops(rng, scale: int) -> tuple[int, list[str]]:
    from .. import fheops as fo

    fails, cases = [], 0
    p = fo.make_params(N=256, k=4, W=64, scale_bits=40)
    r = fo.FheRng(int(rng.integers(0, 1 << 62)))
    sk, pk = fo.keygen(p, r)
    relin = fo.relin_hint(p, sk, r)
    rot = fo.rotation_hint(p, sk, 1, r)
    for _ in range(max(1, scale)):
        a = rng.uniform(-1, 1, p.slots) + 1j * rng.uniform(-1, 1, p.slots)
        b = rng.uniform(-1, 1, p.slots) + 1j * rng.uniform(-1, 1, p.slots)
        ca = fo.encrypt(p, pk, fo.encode(p, a), r)
        cb = fo.encrypt(p, pk, fo.encode(p, b), r)
        cases += 3
        prod = fo.decrypt_values(p, sk, fo.fmul(p, ca, cb, relin))
        if np.max(np.abs(prod - a * b)) / np.max(np.abs(a * b)) > 2.0**-18:
            fails.append("fmul error above 2^-18")
        s = fo.decrypt_values(p, sk, fo.fadd(p, ca, cb))
        if np.max(np.abs(s - (a + b))) > 2.0**-18:
            fails.append("fadd error")
        rv = fo.decrypt_values(p, sk, fo.frot(p, ca, 1, rot))
        if np.max(np.abs(rv - np.roll(a, -1))) > 2.0**-18:
            fails.append("frot permutation")
    return cases, fails


SUITES = {
    "wideint": suite_wideint,
    "modarith": suite_modarith,
    "rns": suite_rns,
    "ntt": suite_ntt,
    "transpose": suite_transpose,
    "fheops": suite_fheops,
}


def run_suites(names=None, seed: int = 0, scale: int = 1) -> list[SuiteResult]:
    out = []
    for name in names or SUITES:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
        rng = np.random.default_rng([seed, len(out)])
        t0 = time.perf_counter()
        try:
            cases, fails = SUITES[name](rng, scale)
        except Exception as exc:  # a crash is a failure, not an abort
            cases, fails = 0, [f"{type(exc).__name__}: {exc}"]
        out.append(SuiteResult(name, cases, sorted(set(fails)), time.perf_counter() - t0))
    return out
