"""Kernel-count formulas for key switching and the other CKKS operations.

Two residue counts coexist: the *calibration* count ``ceil(Q / W)`` (whole
words, used for the key-switching fit) and the *functional* count
``ceil(Q / (W - 2))`` that the ``rns`` module needs for its NTT primes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

OPS = ("KEYGEN", "ENC", "DEC", "FADD", "ADDCP", "MULTCP", "FMUL", "FROT", "FBOT")
KS_OPS = ("FMUL", "FROT", "FBOT")
SMALL_BITS = 16  # TRNG bits drawn per ternary/Gaussian coefficient
KINDS = ("ntt", "intt", "mod_mult", "mod_add", "base_conv", "automorphism", "sample")


def calibration_k(Q_bits: int, W: int) -> int:
    if W <= 0 or Q_bits <= 0:
        raise ValueError("Q_bits and W must be positive")
    return -(-Q_bits // W)


def functional_k(Q_bits: int, W: int) -> int:
    return -(-Q_bits // (W - 2))


def ks_kernel_counts(Q_bits: int, W: int) -> tuple[int, int, int]:
    """``(adds, mults, ntts)`` for one key switch; an exact fit to two published points."""
    if Q_bits < W:
        raise ValueError(f"Q_bits ({Q_bits}) must be at least W ({W})")
    k = calibration_k(Q_bits, W)
    return 3 * k * k + 4 * k, 3 * k * k + 2 * k, 6 * k


@dataclass(frozen=True)
class ModelParams:
    """Workload size for the cost model: ring degree, modulus bits and gadget digits."""

    N: int = 1 << 16
    Q_bits: int = 1536
    dnum: int = 1

    def __post_init__(self):
        if self.N < 4 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two >= 4")
        if self.Q_bits < 1 or self.dnum < 1:
            raise ValueError("Q_bits and dnum must be positive")

    def k(self, W: int) -> int:
        return calibration_k(self.Q_bits, W)

    def alpha(self, W: int) -> int:
        return -(-self.k(W) // self.dnum)

    @property
    def side(self) -> int:
        """Matrix side used by the four-step transform (``N <= side**2``)."""
        return 1 << ((self.N.bit_length() - 1 + 1) // 2)


def as_model_params(params) -> ModelParams:
    """Accept a ``ModelParams``, a scheme parameter set, or a mapping."""
    if isinstance(params, ModelParams):
        return params
    if isinstance(params, dict):
        return ModelParams(**params)
    if hasattr(params, "basis") and hasattr(params, "N"):
        qbits = params.Q_target_bits or params.basis.Q.bit_length()
        return ModelParams(N=params.N, Q_bits=qbits, dnum=params.dnum)
    raise TypeError(f"cannot interpret {type(params).__name__} as model parameters")


def _zero() -> dict[str, int]:
    return dict.fromkeys(KINDS, 0)


def _merge(*parts: dict[str, int]) -> dict[str, int]:
    out = _zero()
    for p in parts:
        for key, v in p.items():
            out[key] = out.get(key, 0) + v
    return out


def ks_phase(Q_bits: int, W: int) -> dict[str, int]:
    """Calibrated key-switch census: the fitted add/mult/NTT totals.

    The 6k transforms split evenly between forward and inverse; ``base_conv``
    counts the ``3k`` target rows of the three base conversions (their
    arithmetic is already inside the add/mult totals).
    """
    adds, mults, ntts = ks_kernel_counts(Q_bits, W)
    k = calibration_k(Q_bits, W)
    c = _zero()
    c.update(ntt=ntts // 2, intt=ntts - ntts // 2, mod_mult=mults, mod_add=adds, base_conv=3 * k)
    return c


def rescale_phase(level: int, polys: int = 2) -> dict[str, int]:
    m = level - 1
    c = _zero()
    c.update(intt=polys, ntt=polys * m, mod_mult=2 * polys * m, mod_add=2 * polys * m)
    return c


def op_phases(op: str, Q_bits: int, W: int, N: int | None = None) -> dict[str, dict[str, int]]:
    """Per-phase kernel counts (residue-row kernels) of one operation at the top level.

    Non-KS phases mirror the functional scheme exactly; the KS phase uses the
    calibrated formula.  FBOT is expanded through ``FBOT_RECIPE``.
    """
    op = op.upper()
    k = calibration_k(Q_bits, W)
    n = N or 0
    z = _zero
    if op == "FADD":
        return {"arith": {**z(), "mod_add": 2 * k}}
    if op == "ADDCP":
        return {"arith": {**z(), "mod_add": k}}
    if op == "MULTCP":
        return {"arith": {**z(), "mod_mult": 2 * k}, "rescale": rescale_phase(k)}
    if op == "FMUL":
        return {
            "tensor": {**z(), "mod_mult": 4 * k, "mod_add": k},
            "ks": ks_phase(Q_bits, W),
            "accumulate": {**z(), "mod_add": 2 * k},
            "rescale": rescale_phase(k),
        }
    if op == "FROT":
        return {
            "automorphism": {**z(), "automorphism": 2 * k},
            "ks": ks_phase(Q_bits, W),
            "accumulate": {**z(), "mod_add": k},
        }
    if op == "DEC":
        return {"arith": {**z(), "mod_mult": k, "mod_add": k}}
    if op == "ENC":
        # v, e0, e1 sampled and transformed; b = v*pk.b + e0 + m, a = v*pk.a + e1
        return {
            "sample": {**z(), "sample": 3, "ntt": 3 * k, "trng_bits": 3 * SMALL_BITS * n},
            "arith": {**z(), "mod_mult": 2 * k, "mod_add": 3 * k},
        }
    if op == "KEYGEN":
        # s over chain + special rows, a uniform, e gaussian; b = e - a*s
        alpha = k
        bits = 2 * SMALL_BITS * n + k * W * n
        return {
            "sample": {**z(), "sample": 3, "ntt": (k + alpha) + k, "trng_bits": bits},
            "arith": {**z(), "mod_mult": k, "mod_add": k},
        }
    if op == "FBOT":
        out: dict[str, dict[str, int]] = {"modraise": {**z(), "intt": 2, "ntt": 2 * k}}
        for stage, recipe in FBOT_RECIPE:
            for name, count in recipe:
                for phase, counts in op_phases(name, Q_bits, W, N).items():
                    key = f"{stage}.{phase}"
                    out[key] = _merge(out.get(key, z()), {kk: v * count for kk, v in counts.items()})
        return out
    raise ValueError(f"unknown operation {op!r}; expected one of {OPS}")


def op_counts(op: str, Q_bits: int, W: int, N: int | None = None) -> dict[str, int]:
    return _merge(*op_phases(op, Q_bits, W, N).values())


# Bootstrapping as a fixed composite: (stage, ((op, count), ...)).  Rotations in
# the two linear-transform stages use steps 1/2/4 and 2/4/8, so together with
# relinearisation five distinct KS hints are live.
FBOT_RECIPE: tuple[tuple[str, tuple[tuple[str, int], ...]], ...] = (
    ("cts", (("FROT", 6), ("MULTCP", 6), ("FADD", 6))),
    ("evalmod", (("FMUL", 8), ("MULTCP", 4), ("ADDCP", 4), ("FADD", 4))),
    ("stc", (("FROT", 6), ("MULTCP", 6), ("FADD", 6))),
)
FBOT_ROTATIONS = {"cts": (1, 2, 4), "stc": (2, 4, 8)}


def fbot_hints() -> tuple[str, ...]:
    rots = sorted({s for steps in FBOT_ROTATIONS.values() for s in steps})
    return ("relin",) + tuple(f"rot{s}" for s in rots)


def log2_int(n: int) -> int:
    return int(math.log2(n))
