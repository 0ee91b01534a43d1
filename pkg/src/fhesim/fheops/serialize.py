"""Versioned binary ciphertext layout.

Header (little-endian): magic ``b"FHEC"``, u16 version, u32 N, u16 k (chain
length of the parameter set), u16 level, u8 domain (0 coeff, 1 eval), u16
word bytes, f64 scale.  Then ``b`` and ``a`` residues, row by row, each
coefficient as a ``word bytes`` little-endian unsigned integer in the stored
(Montgomery) form.
"""
from __future__ import annotations

import struct

import numpy as np

from .params import SchemeParams
from .poly import COEFF, EVAL, Polynomial
from .scheme import Ciphertext

MAGIC = b"FHEC"
VERSION = 1
_HEADER = struct.Struct("<4sHIHHBHd")


class FormatError(ValueError):
    pass


def _pack_rows(data: np.ndarray, word: int) -> bytes:
    if data.dtype != object and word == 8:
        return data.astype("<u8").tobytes()
    return b"".join(int(v).to_bytes(word, "little") for v in data.ravel())


def _unpack_rows(buf: bytes, rows: int, N: int, word: int, dtype) -> np.ndarray:
    if dtype != object and word == 8:
        return np.frombuffer(buf, "<u8").astype(np.uint64).reshape(rows, N)
    vals = [int.from_bytes(buf[i:i + word], "little") for i in range(0, len(buf), word)]
    arr = np.empty(rows * N, dtype=object)
    arr[:] = vals
    arr = arr.reshape(rows, N)
    return arr.astype(np.uint64) if dtype != object else arr


def serialize_ciphertext(params: SchemeParams, ct: Ciphertext) -> bytes:
    word = params.W // 8
    dom = 1 if ct.domain == EVAL else 0
    head = _HEADER.pack(MAGIC, VERSION, params.N, params.k, ct.level, dom, word, float(ct.scale))
    return head + _pack_rows(ct.b.data, word) + _pack_rows(ct.a.data, word)


def deserialize_ciphertext(params: SchemeParams, blob: bytes) -> Ciphertext:
    if len(blob) < _HEADER.size:
        raise FormatError("truncated header")
    magic, version, N, k, level, dom, word, scale = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError("bad magic")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if N != params.N or k != params.k or word != params.W // 8:
        raise FormatError("ciphertext does not match the parameter set")
    if not 1 <= level <= k or dom not in (0, 1):
        raise FormatError("corrupt header")
    size = level * N * word
    body = blob[_HEADER.size:]
    if len(body) != 2 * size:
        raise FormatError(f"expected {2 * size} payload bytes, got {len(body)}")
    rows = tuple(range(level))
    dtype = params.plan(rows).mset.dtype
    domain = EVAL if dom else COEFF
    b = Polynomial(_unpack_rows(body[:size], level, N, word, dtype), rows, domain)
    a = Polynomial(_unpack_rows(body[size:], level, N, word, dtype), rows, domain)
    return Ciphertext(b, a, scale)
