"""A small RNS-CKKS scheme built on the library's NTT, RNS and Montgomery kernels."""
from .encoding import Plaintext, decode, embed, embed_inverse, encode, slot_positions
from .params import (
    SchemeParams,
    load_params,
    make_params,
    params_for_target,
    parse_params,
    save_params,
)
from .poly import COEFF, EVAL, Polynomial, automorphism, automorphism_coeff, eval_permutation
from .rng import FheRng
from .scheme import (
    Ciphertext,
    KeySwitchHint,
    LevelError,
    PublicKey,
    SecretKey,
    addcp,
    decrypt,
    encrypt,
    encrypt_sk,
    fadd,
    fmul,
    frot,
    galois_element,
    key_switch,
    keygen,
    ks_hint_gen,
    level_down,
    multcp,
    relin_hint,
    rescale,
    rotation_hint,
)
from .serialize import FormatError, deserialize_ciphertext, serialize_ciphertext


def decrypt_values(params: SchemeParams, sk: SecretKey, ct: Ciphertext):
    """Decrypt and decode to the slot vector."""
    return decode(params, decrypt(params, sk, ct))


__all__ = [
    "COEFF",
    "EVAL",
    "Ciphertext",
    "FheRng",
    "FormatError",
    "KeySwitchHint",
    "LevelError",
    "Plaintext",
    "Polynomial",
    "PublicKey",
    "SchemeParams",
    "SecretKey",
    "addcp",
    "automorphism",
    "automorphism_coeff",
    "decode",
    "decrypt",
    "decrypt_values",
    "deserialize_ciphertext",
    "embed",
    "embed_inverse",
    "encode",
    "encrypt",
    "encrypt_sk",
    "eval_permutation",
    "fadd",
    "fmul",
    "frot",
    "galois_element",
    "key_switch",
    "keygen",
    "ks_hint_gen",
    "level_down",
    "load_params",
    "make_params",
    "multcp",
    "params_for_target",
    "parse_params",
    "relin_hint",
    "rescale",
    "rotation_hint",
    "save_params",
    "serialize_ciphertext",
    "slot_positions",
]
