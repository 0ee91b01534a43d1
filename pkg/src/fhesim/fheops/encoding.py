"""Canonical-embedding encoder.

Slot ``j`` is the evaluation at ``zeta**(5**j mod 2N)`` with ``zeta =
exp(i*pi/N)``; its complex conjugate sits at ``zeta**(-5**j)``.  Writing
``m(zeta**(2t+1)) = sum_i (m_i zeta**i) exp(2*pi*i*i*t/N)`` turns both
directions into one length-``N`` FFT.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .params import SchemeParams
from .poly import Polynomial, centered_coeffs, from_signed, to_coeff, to_eval


@dataclass(eq=False)
class Plaintext:
    poly: Polynomial
    scale: float

    @property
    def level(self) -> int:
        return self.poly.level


@lru_cache(maxsize=16)
def slot_positions(N: int) -> tuple[np.ndarray, np.ndarray]:
    """FFT bins of each slot and of its conjugate."""
    n = N // 2
    g = np.empty(n, np.int64)
    acc = 1
    for j in range(n):
        g[j] = acc
        acc = acc * 5 % (2 * N)
    pos = (g - 1) // 2
    conj = (2 * N - g - 1) // 2
    pos.setflags(write=False)
    conj.setflags(write=False)
    return pos, conj


@lru_cache(maxsize=16)
def _zeta_powers(N: int) -> np.ndarray:
    z = np.exp(1j * np.pi * np.arange(N) / N)
    z.setflags(write=False)
    return z


def embed_inverse(values, N: int, scale: float) -> np.ndarray:
    """Real coefficient vector whose embedding is ``scale * values`` (not rounded)."""
    z = np.asarray(values, dtype=np.complex128)
    if z.shape != (N // 2,):
        raise ValueError(f"expected {N // 2} slot values, got shape {z.shape}")
    pos, conj = slot_positions(N)
    V = np.zeros(N, np.complex128)
    V[pos] = z * scale
    V[conj] = np.conj(z) * scale
    c = np.fft.fft(V) / N
    return (c * np.conj(_zeta_powers(N))).real


def embed(coeffs, N: int) -> np.ndarray:
    """Slot values of a real coefficient vector (no scaling)."""
    c = np.asarray(coeffs, dtype=np.float64)
    V = N * np.fft.ifft(c * _zeta_powers(N))
    pos, _ = slot_positions(N)
    return V[pos]


def encode(params: SchemeParams, values, scale: float | None = None, level: int | None = None) -> Plaintext:
    scale = params.scale if scale is None else float(scale)
    level = params.k if level is None else level
    m = np.rint(embed_inverse(values, params.N, scale))
    if np.max(np.abs(m), initial=0.0) >= 2.0**62:
        raise OverflowError("encoded coefficients exceed 62 bits; lower the scale")
    poly = from_signed(params, m.astype(np.int64), range(level))
    return Plaintext(to_eval(params, poly), scale)


def decode(params: SchemeParams, pt: Plaintext) -> np.ndarray:
    coeffs = centered_coeffs(params, to_coeff(params, pt.poly))
    return embed(np.array([float(c) for c in coeffs]), params.N) / pt.scale
