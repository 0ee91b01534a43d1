"""Modular arithmetic over odd moduli using Montgomery reduction."""
from .montgomery import (
    GUARD_BITS,
    ContextMismatch,
    ModElement,
    MontgomeryContext,
    from_montgomery,
    mod_add,
    mod_inverse,
    mod_mul,
    mod_neg,
    mod_pow,
    mod_sub,
    montgomery_reduce,
    montgomery_reduce_batch,
    reduce_ints,
    to_montgomery,
)
from .primes import (
    PrimeSearchError,
    find_ntt_prime,
    is_probable_prime,
    ntt_primes_above,
    ntt_primes_below,
    primitive_2n_root,
)
from .vector import ModulusSet

__all__ = [
    "GUARD_BITS",
    "ContextMismatch",
    "ModElement",
    "ModulusSet",
    "MontgomeryContext",
    "PrimeSearchError",
    "find_ntt_prime",
    "from_montgomery",
    "is_probable_prime",
    "mod_add",
    "mod_inverse",
    "mod_mul",
    "mod_neg",
    "mod_pow",
    "mod_sub",
    "montgomery_reduce",
    "montgomery_reduce_batch",
    "ntt_primes_above",
    "ntt_primes_below",
    "primitive_2n_root",
    "reduce_ints",
    "to_montgomery",
]
