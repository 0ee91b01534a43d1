"""Scheme parameters, the modulus chain and the parameter file format.

Chain layout: ``q_0`` is the largest ``(W-2)``-bit NTT prime; ``q_1..q_{k-1}``
are the smallest NTT primes just above ``2**scale_bits`` so a rescale divides
the scale by almost exactly ``2**scale_bits``.  Key switching uses ``alpha =
ceil(k / dnum)`` special primes of ``W-2`` bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import tomli

from ..modarith import GUARD_BITS, ntt_primes_above, ntt_primes_below
from ..ntt import NttPlan
from ..rns import RnsBasis, residue_count

PARAM_KEYS = ("N", "Q_target_bits", "W", "k", "scale_bits", "sigma", "seed", "dnum")


@dataclass(frozen=True, eq=False)
class SchemeParams:
    N: int
    basis: RnsBasis
    special: RnsBasis
    scale: float
    sigma: float = 3.2
    dnum: int = 1
    seed: int | None = None
    Q_target_bits: int | None = None
    _plans: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.N < 4 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if self.basis.W != self.special.W:
            raise ValueError("chain and special primes must share a width")
        if not 1 <= self.dnum <= self.k:
            raise ValueError(f"dnum must be in 1..{self.k}")
        if self.scale >= min(self.basis.primes):
            raise ValueError("scale must be below the smallest chain modulus")
        if set(self.basis.primes) & set(self.special.primes):
            raise ValueError("special primes overlap the chain")

    @property
    def k(self) -> int:
        return self.basis.k

    @property
    def W(self) -> int:
        return self.basis.W

    @property
    def alpha(self) -> int:
        return self.special.k

    @property
    def slots(self) -> int:
        return self.N // 2

    @property
    def scale_bits(self) -> int:
        return round(self.scale).bit_length() - 1

    @cached_property
    def full(self) -> RnsBasis:
        """Chain followed by special primes."""
        return self.basis + self.special

    @cached_property
    def full_plan(self) -> NttPlan:
        return NttPlan(self.full.mset, self.N)

    def level_basis(self, level: int) -> RnsBasis:
        return self.basis.prefix(level)

    def ext_rows(self, level: int) -> list[int]:
        """Row indices of ``Q_level + P`` inside the full basis."""
        return list(range(level)) + list(range(self.k, self.k + self.alpha))

    def plan(self, rows) -> NttPlan:
        key = tuple(rows)
        p = self._plans.get(key)
        if p is None:
            p = self._plans[key] = self.full_plan.rows(list(key))
        return p

    def digits(self, level: int) -> list[list[int]]:
        """Chain indices of each key-switching digit that are active at ``level``."""
        a = -(-self.k // self.dnum)
        out = []
        for j in range(self.dnum):
            idx = [i for i in range(j * a, min((j + 1) * a, self.k)) if i < level]
            if idx:
                out.append(idx)
        return out

    def to_text(self) -> str:
        lines = [
            f"N = {self.N}",
            f"W = {self.W}",
            f"k = {self.k}",
            f"scale_bits = {self.scale_bits}",
            f"sigma = {float(self.sigma)!r}",
            f"dnum = {self.dnum}",
        ]
        if self.Q_target_bits is not None:
            lines.append(f"Q_target_bits = {self.Q_target_bits}")
        if self.seed is not None:
            lines.append(f"seed = {self.seed}")
        lines.append("moduli = [" + ", ".join(f'"{q}"' for q in self.basis.primes) + "]")
        lines.append("special = [" + ", ".join(f'"{p}"' for p in self.special.primes) + "]")
        return "\n".join(lines) + "\n"


def chain_primes(N: int, k: int, W: int, scale_bits: int) -> tuple[int, ...]:
    usable = W - GUARD_BITS
    if scale_bits >= usable:
        raise ValueError(f"scale_bits={scale_bits} does not fit a {W}-bit datapath")
    q0 = ntt_primes_below(usable, N, 1)[0]
    return (q0,) + tuple(ntt_primes_above(scale_bits, N, k - 1)) if k > 1 else (q0,)


def make_params(
    N: int = 4096,
    k: int = 6,
    W: int = 64,
    scale_bits: int = 40,
    sigma: float = 3.2,
    dnum: int = 1,
    seed: int | None = None,
    Q_target_bits: int | None = None,
) -> SchemeParams:
    """Desk-scale defaults: ``N = 2**12``, six moduli, 64-bit words, scale ``2**40``."""
    if k < 1:
        raise ValueError("k must be positive")
    chain = chain_primes(N, k, W, scale_bits)
    alpha = -(-k // dnum)
    # special primes are the next-largest full-width primes after q0
    special = ntt_primes_below(W - GUARD_BITS, N, alpha + 1)[1:]
    return SchemeParams(
        N=N,
        basis=RnsBasis.from_primes(chain, W),
        special=RnsBasis.from_primes(special, W),
        scale=float(2**scale_bits),
        sigma=sigma,
        dnum=dnum,
        seed=seed,
        Q_target_bits=Q_target_bits,
    )


def params_for_target(Q_target_bits: int, N: int, W: int = 64, **kw) -> SchemeParams:
    """Chain length chosen as ``ceil(Q_target_bits / (W-2))``."""
    return make_params(N=N, k=residue_count(Q_target_bits, W), W=W, Q_target_bits=Q_target_bits, **kw)


def parse_params(text: str) -> SchemeParams:
    data = tomli.loads(text)
    unknown = set(data) - set(PARAM_KEYS) - {"moduli", "special"}
    if unknown:
        raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
    if "N" not in data:
        raise ValueError("parameter file must set N")
    N = int(data["N"])
    W = int(data.get("W", 64))
    if "k" not in data and "Q_target_bits" in data:
        data["k"] = residue_count(int(data["Q_target_bits"]), W)
    p = make_params(
        N=N,
        k=int(data.get("k", 6)),
        W=W,
        scale_bits=int(data.get("scale_bits", 40)),
        sigma=float(data.get("sigma", 3.2)),
        dnum=int(data.get("dnum", 1)),
        seed=data.get("seed"),
        Q_target_bits=data.get("Q_target_bits"),
    )
    for key, basis in (("moduli", p.basis), ("special", p.special)):
        if key in data and [int(x) for x in data[key]] != list(basis.primes):
            raise ValueError(f"{key} in file do not match the regenerated chain")
    return p


def load_params(path: str | Path) -> SchemeParams:
    return parse_params(Path(path).read_text())


def save_params(params: SchemeParams, path: str | Path) -> None:
    Path(path).write_text(params.to_text())
