"""Per-kernel and per-operation latency/energy costing."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ..transpose import MatrixView, TuHierarchy, transpose_recursive
from .config import ENERGY_KEYS, ArchConfig
from .counts import (
    KS_OPS,
    ModelParams,
    as_model_params,
    calibration_k,
    fbot_hints,
    functional_k,
    op_phases,
)

COUNT_KEYS = (
    "ntt",
    "intt",
    "mod_add",
    "mod_mult",
    "base_conv",
    "transpose_moves",
    "automorphism",
    "transposes",
    "sample",
    "hint_loads",
)
CHANNELS = ("spm", "noc", "hbm")
UNIT_CLASSES = ("ntt", "modarith", "auto", "trng", "tu", "noc", "hbm")
KERNEL_KINDS = (
    "ntt",
    "intt",
    "mod_mult",
    "mod_add",
    "base_conv",
    "automorphism",
    "transpose",
    "sample",
    "hbm_load",
)


@dataclass(frozen=True)
class Kernel:
    """One kernel batch: ``count`` residue rows (or transforms) of ``n`` elements.

    ``src`` is the source row count of a base conversion, ``side`` the matrix
    side of a transpose, ``nbytes`` the size of a memory transfer and ``bits``
    the TRNG output of a sampling kernel.
    """

    kind: str
    count: int = 1
    n: int = 0
    src: int = 0
    side: int = 0
    nbytes: int = 0
    bits: int = 0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if min(self.count, self.n, self.src, self.side, self.nbytes, self.bits) < 0:
            raise ValueError("kernel sizes must be non-negative")


def unit_class(kind: str, arch: ArchConfig) -> str:
    if kind in ("ntt", "intt"):
        return "ntt"
    if kind in ("mod_mult", "mod_add", "base_conv"):
        return "modarith"
    if kind == "automorphism":
        return "auto"
    if kind == "transpose":
        return "tu" if arch.tu_enabled else "noc"
    if kind == "sample":
        return "trng"
    if kind == "hbm_load":
        return "hbm"
    raise ValueError(f"unknown kernel kind {kind!r}")


def energy_table(arch: ArchConfig) -> dict[str, float]:
    """Joules per unit quantity; SPM bytes carry the refresh-skipping discount."""
    tab = {k: float(arch.energy[k]) * 1e-12 for k in ENERGY_KEYS}
    tab["spm_byte"] *= 1.0 - arch.spm_refresh_discount
    return tab


@dataclass
class CostReport:
    counts: dict = field(default_factory=lambda: dict.fromkeys(COUNT_KEYS, 0))
    cycles: int = 0
    freq_hz: float = 1.0
    quantities: dict = field(default_factory=lambda: dict.fromkeys(ENERGY_KEYS, 0.0))
    energy: dict = field(default_factory=dict)
    traffic: dict = field(default_factory=lambda: dict.fromkeys(CHANNELS, 0))
    breakdown: dict = field(default_factory=lambda: dict.fromkeys(UNIT_CLASSES, 0))
    labels: dict = field(default_factory=dict)
    phases: dict = field(default_factory=dict)

    @property
    def seconds(self) -> float:
        return self.cycles / self.freq_hz

    @property
    def joules(self) -> float:
        return float(sum(self.quantities[k] * self.energy[k] for k in ENERGY_KEYS))

    @classmethod
    def empty(cls, arch: ArchConfig) -> "CostReport":
        return cls(freq_hz=arch.freq_hz, energy=energy_table(arch))

    def __add__(self, other: "CostReport") -> "CostReport":
        """Serial composition."""
        if self.freq_hz != other.freq_hz or self.energy != other.energy:
            raise ValueError("cannot add reports from different architectures")
        out = CostReport(
            counts={k: self.counts.get(k, 0) + other.counts.get(k, 0) for k in COUNT_KEYS},
            cycles=self.cycles + other.cycles,
            freq_hz=self.freq_hz,
            quantities={k: self.quantities[k] + other.quantities[k] for k in ENERGY_KEYS},
            energy=dict(self.energy),
            traffic={c: self.traffic[c] + other.traffic[c] for c in CHANNELS},
            breakdown={u: self.breakdown[u] + other.breakdown[u] for u in UNIT_CLASSES},
            labels={**self.labels, **other.labels},
            phases={**self.phases, **other.phases},
        )
        return out

    def scaled(self, factor: int) -> "CostReport":
        out = CostReport.empty_like(self)
        for _ in range(factor):
            out = out + self
        return out

    @classmethod
    def empty_like(cls, other: "CostReport") -> "CostReport":
        return cls(freq_hz=other.freq_hz, energy=dict(other.energy), labels=dict(other.labels))

    def summary(self) -> dict:
        row = {k: self.counts.get(k, 0) for k in COUNT_KEYS}
        row.update(cycles=self.cycles, seconds=self.seconds, joules=self.joules)
        row.update({f"{c}_bytes": self.traffic[c] for c in CHANNELS})
        return row


@lru_cache(maxsize=None)
def transpose_moves(side: int, bank_count: int) -> int:
    """Element moves of one recursive ``side x side`` transpose under the TU placement rule."""
    if side < 2:
        return 0
    m = MatrixView(np.zeros(side * side, np.uint64), side)
    _, rep = transpose_recursive(m, TuHierarchy(bank_count=bank_count))
    return rep.total_moves


def _lanes(total: int, share: float) -> int:
    return max(1, int(total * share))


def cost_kernel(kernel: Kernel, arch: ArchConfig, share: float = 1.0) -> CostReport:
    """Latency and energy of one kernel batch on ``share`` of the chip's units of its class."""
    rep = CostReport.empty(arch)
    kind, c, n = kernel.kind, kernel.count, kernel.n
    wb = arch.W // 8
    q = rep.quantities
    cyc = 0
    fill = arch.pipeline_fill
    if kind in ("ntt", "intt"):
        if c and n:
            bf = c * (n // 2) * int(math.log2(n))
            cyc = -(-bf // _lanes(arch.ntt_lanes, share)) + fill
            q["butterfly"] = bf
            rep.traffic["spm"] = 2 * c * n * wb
        rep.counts[kind] = c
    elif kind in ("mod_mult", "mod_add"):
        elems = c * n
        if elems:
            lanes = arch.mult_lanes if kind == "mod_mult" else arch.add_lanes
            cyc = -(-elems // _lanes(lanes, share)) + (fill if kind == "mod_mult" else 1)
            q[kind] = elems
            rep.traffic["spm"] = 3 * elems * wb
        rep.counts[kind] = c
    elif kind == "base_conv":
        work = kernel.src * c * n
        if work:
            m = -(-work // _lanes(arch.mult_lanes, share))
            a = -(-work // _lanes(arch.add_lanes, share))
            cyc = max(m, a) + fill
            q["mod_mult"] = work
            q["mod_add"] = work
            rep.traffic["spm"] = (kernel.src + 1) * c * n * wb
        rep.counts.update(mod_mult=kernel.src * c, mod_add=kernel.src * c, base_conv=c)
    elif kind == "automorphism":
        elems = c * n
        if elems:
            cyc = -(-elems // _lanes(arch.auto_lanes, share)) + 1
            q["automorphism"] = elems
            rep.traffic["spm"] = 2 * elems * wb
        rep.counts["automorphism"] = c
    elif kind == "transpose":
        if c and kernel.side >= 2:
            moves = c * transpose_moves(kernel.side, arch.bank_count)
            rep.counts["transpose_moves"] = moves
            if arch.tu_enabled:
                words = moves * -(-arch.W // arch.tu_width_bits)
                tu_cycles = -(-words // _lanes(arch.tu_count, share))
                cyc = math.ceil(tu_cycles * arch.freq_hz / arch.tu_freq_hz)
                q["tu_move"] = words
            else:
                nbytes = c * 2 * kernel.side * kernel.side * wb
                cyc = math.ceil(nbytes / (arch.noc_bytes_per_s * share) * arch.freq_hz)
                q["noc_byte"] = nbytes
                rep.traffic["noc"] = nbytes
                rep.traffic["spm"] = nbytes
        rep.counts["transposes"] = c
    elif kind == "sample":
        if kernel.bits:
            rate = arch.trng_bits_per_s_per_cu * arch.cu_count * share
            cyc = math.ceil(kernel.bits / rate * arch.freq_hz)
            q["trng_bit"] = kernel.bits
            rep.traffic["spm"] = kernel.bits // 8
        rep.counts["sample"] = c
    elif kind == "hbm_load":
        if kernel.nbytes:
            cyc = math.ceil(kernel.nbytes / (arch.hbm_bytes_per_s * share) * arch.freq_hz)
            q["hbm_byte"] = kernel.nbytes
            rep.traffic["hbm"] = kernel.nbytes
            rep.traffic["spm"] = kernel.nbytes
    q["spm_byte"] = rep.traffic["spm"]
    rep.cycles = int(cyc)
    rep.breakdown[unit_class(kind, arch)] = int(cyc)
    return rep


# -- SPM residency ------------------------------------------------------------------------
@dataclass(frozen=True)
class Residency:
    spm_bytes: int
    ciphertext_bytes: int
    working_set_bytes: int
    twiddle_bytes: int
    hint_bytes: int
    pinned: tuple
    streamed: tuple

    def resident(self, item: str) -> bool:
        return item in self.pinned

    @property
    def ciphertexts_fit(self) -> bool:
        return self.working_set_bytes <= self.spm_bytes


def footprint(arch: ArchConfig, params) -> dict[str, int]:
    mp = as_model_params(params)
    k = mp.k(arch.W)
    alpha = mp.alpha(arch.W)
    wb = arch.W // 8
    return {
        "ciphertext": 2 * k * mp.N * wb,
        "hint": 2 * mp.dnum * (k + alpha) * mp.N * wb,
        "twiddles": (k + alpha) * (mp.N + 4 * mp.side) * wb,
    }


def plan_residency(arch: ArchConfig, params, hints: Sequence[str], uses: dict | None = None) -> Residency:
    """Greedy pin: the live-ciphertext pool first, then twiddles and hints.

    Optional items are ranked by size (smallest first, ties by first use); when
    ``uses`` is given, items used more often rank ahead of equally sized ones.
    """
    fp = footprint(arch, params)
    ws = arch.live_ciphertexts * fp["ciphertext"]
    items = [("twiddles", fp["twiddles"])] + [(h, fp["hint"]) for h in dict.fromkeys(hints)]
    order = {name: i for i, (name, _) in enumerate(items)}
    uses = uses or {}
    items.sort(key=lambda it: (it[1], -uses.get(it[0], 0), order[it[0]]))
    free = arch.spm_bytes - ws
    pinned, streamed = [], []
    for name, size in items:
        if size <= free:
            pinned.append(name)
            free -= size
        else:
            streamed.append(name)
    return Residency(arch.spm_bytes, fp["ciphertext"], ws, fp["twiddles"], fp["hint"],
                     tuple(pinned), tuple(streamed))


def op_hints(op: str, steps: int = 1) -> tuple[str, ...]:
    op = op.upper()
    if op == "FMUL":
        return ("relin",)
    if op == "FROT":
        return (f"rot{steps}",)
    if op == "FBOT":
        return fbot_hints()
    return ()


def _ks_invocations(op: str) -> dict[str, int]:
    """Hint name -> number of key switches using it within one operation."""
    from .counts import FBOT_RECIPE, FBOT_ROTATIONS

    op = op.upper()
    if op in ("FMUL", "FROT"):
        return {op_hints(op)[0]: 1}
    if op != "FBOT":
        return {}
    out = {"relin": 0}
    for stage, recipe in FBOT_RECIPE:
        for name, count in recipe:
            if name == "FMUL":
                out["relin"] += count
            elif name == "FROT":
                rots = FBOT_ROTATIONS[stage]
                for i in range(count):
                    key = f"rot{rots[i % len(rots)]}"
                    out[key] = out.get(key, 0) + 1
    return out


def phase_kernels(counts: dict, mp: ModelParams) -> list[Kernel]:
    """Kernel batches for one census phase (KS arithmetic already in the add/mult totals)."""
    N = mp.N
    ks = [
        Kernel("ntt", counts.get("ntt", 0), N),
        Kernel("intt", counts.get("intt", 0), N),
        Kernel("transpose", counts.get("ntt", 0) + counts.get("intt", 0), side=mp.side),
        Kernel("mod_mult", counts.get("mod_mult", 0), N),
        Kernel("mod_add", counts.get("mod_add", 0), N),
        Kernel("automorphism", counts.get("automorphism", 0), N),
    ]
    if counts.get("sample"):
        ks.append(Kernel("sample", counts["sample"], bits=counts.get("trng_bits", 0)))
    return [k for k in ks if k.count]


def estimate_op(op: str, arch: ArchConfig, params=None, residency: Residency | None = None) -> CostReport:
    """Dependency-serial cost of one operation at the top level.

    Every kernel batch runs on the whole chip; batches do not overlap.  KS
    phases use the calibrated key-switch counts, other phases the functional
    census.  Hints and twiddles that the residency plan cannot pin are
    streamed from HBM at every use.
    """
    mp = as_model_params(params if params is not None else ModelParams())
    op = op.upper()
    phases = op_phases(op, mp.Q_bits, arch.W, mp.N)
    if residency is None:
        residency = plan_residency(arch, mp, op_hints(op))
    total = CostReport.empty(arch)
    fp = footprint(arch, mp)
    tw_row = (mp.N + 4 * mp.side) * (arch.W // 8)
    for name, counts in phases.items():
        rep = CostReport.empty(arch)
        for kern in phase_kernels(counts, mp):
            rep = rep + cost_kernel(kern, arch)
        if counts.get("base_conv"):
            rep.counts["base_conv"] += counts["base_conv"]
        transforms = counts.get("ntt", 0) + counts.get("intt", 0)
        if transforms and not residency.resident("twiddles"):
            rep = rep + cost_kernel(Kernel("hbm_load", nbytes=transforms * tw_row), arch)
        total = total + rep
        total.phases[name] = {**{k: v for k, v in counts.items()}, "cycles": rep.cycles}
    for hint, n_ks in _ks_invocations(op).items():
        if not residency.resident(hint):
            load = cost_kernel(Kernel("hbm_load", nbytes=fp["hint"]), arch)
            load.counts["hint_loads"] = 1
            total = total + load.scaled(n_ks)
    if not residency.ciphertexts_fit:
        total = total + cost_kernel(Kernel("hbm_load", nbytes=3 * fp["ciphertext"]), arch)
    total.labels.update(
        op=op,
        arch=arch.name,
        W=arch.W,
        N=mp.N,
        Q_bits=mp.Q_bits,
        k_calibration=calibration_k(mp.Q_bits, arch.W),
        k_functional=functional_k(mp.Q_bits, arch.W),
        ks_counts="calibrated fit" if op in KS_OPS else "n/a",
        streamed=",".join(residency.streamed),
    )
    return total


def estimate_program(ops: Iterable[str], arch: ArchConfig, params=None) -> CostReport:
    mp = as_model_params(params if params is not None else ModelParams())
    ops = list(ops)
    hints = [h for op in ops for h in op_hints(op)]
    res = plan_residency(arch, mp, hints)
    total = CostReport.empty(arch)
    for op in ops:
        total = total + estimate_op(op, arch, mp, res)
    return total
