"""Primality testing and NTT-friendly prime search."""
from __future__ import annotations

import random
from functools import lru_cache

# Deterministic for n < 3.3e24, which covers every n < 2**64.
_SMALL_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_RANDOM_ROUNDS = 64
_TRIAL_PRIMES = tuple(p for p in range(3, 2000, 2) if all(p % d for d in range(3, int(p**0.5) + 1, 2)))


class PrimeSearchError(RuntimeError):
    pass


def _mr_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin: fixed witnesses below 2**64, 64 seeded random rounds above.

    The random bases are drawn from a generator seeded with ``n`` itself so the
    verdict for a given ``n`` never changes between runs.
    """
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    for p in _TRIAL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < 1 << 64:
        bases = _SMALL_WITNESSES
    else:
        rng = random.Random(n)
        bases = [rng.randrange(2, n - 1) for _ in range(_RANDOM_ROUNDS)]
    return all(_mr_round(n, d, s, a % n) for a in bases if a % n)


@lru_cache(maxsize=None)
def _prime_list(limit_bits: int, two_n: int, count: int, floor_bits: int) -> tuple[int, ...]:
    limit = 1 << limit_bits
    floor = 1 << floor_bits
    c = (limit - 1) // two_n * two_n + 1
    if c >= limit:
        c -= two_n
    found: list[int] = []
    while len(found) < count:
        if c <= floor:
            raise PrimeSearchError(
                f"only {len(found)} primes = 1 mod {two_n} in ({floor_bits}, {limit_bits}) bits"
            )
        if is_probable_prime(c):
            found.append(c)
        c -= two_n
    return tuple(found)


def find_ntt_prime(width: int, degree: int, index: int = 0) -> int:
    """The ``index``-th largest prime ``q < 2**(width-2)`` with ``q = 1 mod 2*degree``.

    The search floor is ``2**(width-3)``, so every returned prime has exactly
    ``width - 2`` bits.
    """
    if degree < 1 or degree & (degree - 1):
        raise ValueError(f"degree must be a power of two, got {degree}")
    if width < 8:
        raise ValueError("width too small")
    return ntt_primes_below(width - 2, degree, index + 1)[index]


def ntt_primes_below(bits: int, degree: int, count: int) -> tuple[int, ...]:
    """The ``count`` largest ``bits``-bit primes congruent to 1 mod ``2*degree``."""
    return _prime_list(bits, 2 * degree, count, bits - 1)


@lru_cache(maxsize=None)
def ntt_primes_above(bits: int, degree: int, count: int) -> tuple[int, ...]:
    """The ``count`` smallest primes just above ``2**bits`` congruent to 1 mod ``2*degree``."""
    two_n = 2 * degree
    c = ((1 << bits) // two_n + 1) * two_n + 1
    ceiling = 1 << (bits + 1)
    found: list[int] = []
    while len(found) < count:
        if c >= ceiling:
            raise PrimeSearchError(f"ran out of {bits + 1}-bit candidates")
        if is_probable_prime(c):
            found.append(c)
        c += two_n
    return tuple(found)


def primitive_2n_root(q: int, degree: int) -> int:
    """Smallest-generator-derived primitive ``2*degree``-th root of unity mod prime ``q``."""
    two_n = 2 * degree
    if (q - 1) % two_n:
        raise ValueError(f"{q} is not 1 mod {two_n}")
    e = (q - 1) // two_n
    for g in range(2, 1 << 16):
        psi = pow(g, e, q)
        if pow(psi, degree, q) == q - 1:
            return psi
    raise PrimeSearchError(f"no primitive {two_n}-th root found mod {q}")
