"""Lowering FHE-op programs to kernel dependency graphs.

The decomposition mirrors the functional scheme kernel for kernel: one node per
residue (i)NTT (each followed by its four-step transpose), one batch node per
row-vectorised add/mult, one node per base conversion.  Memory-transfer nodes
follow the SPM residency plan.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..archmodel import ArchConfig, Kernel, ModelParams, plan_residency
from ..archmodel.cost import unit_class
from ..archmodel.counts import FBOT_RECIPE, FBOT_ROTATIONS, SMALL_BITS
from .program import OpProgram, Statement, reorder_for_hint_reuse

CENSUS_KINDS = ("ntt", "intt", "mod_mult", "mod_add", "base_conv", "automorphism", "sample")


@dataclass(frozen=True)
class Shape:
    """Ring and RNS shape the lowering works at."""

    N: int
    k: int
    alpha: int
    dnum: int
    W: int

    @property
    def slots(self) -> int:
        return self.N // 2

    @property
    def side(self) -> int:
        return 1 << ((self.N.bit_length() - 1 + 1) // 2)

    def digits(self, level: int) -> list[list[int]]:
        a = -(-self.k // self.dnum)
        out = []
        for j in range(self.dnum):
            idx = [i for i in range(j * a, min((j + 1) * a, self.k)) if i < level]
            if idx:
                out.append(idx)
        return out

    @property
    def model(self) -> ModelParams:
        return ModelParams(N=self.N, Q_bits=self.k * self.W, dnum=self.dnum)

    @classmethod
    def of(cls, params, arch: ArchConfig | None = None) -> "Shape":
        if isinstance(params, Shape):
            return params
        if hasattr(params, "basis"):  # functional scheme parameters
            return cls(params.N, params.k, params.alpha, params.dnum, params.W)
        mp = params if isinstance(params, ModelParams) else ModelParams(**(params or {}))
        if arch is None:
            raise ValueError("model parameters need an architecture to fix k")
        return cls(mp.N, mp.k(arch.W), mp.alpha(arch.W), mp.dnum, arch.W)


@dataclass
class Node:
    id: int
    kind: str
    count: int = 1
    n: int = 0
    src: int = 0
    side: int = 0
    nbytes: int = 0
    bits: int = 0
    op: int = -1
    phase: str = ""
    latency: int | None = None

    @property
    def kernel(self) -> Kernel:
        return Kernel(self.kind, self.count, self.n, self.src, self.side, self.nbytes, self.bits)


@dataclass
class KernelGraph:
    nodes: list[Node] = field(default_factory=list)
    preds: list[tuple[int, ...]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, kind: str, deps=(), **kw) -> int:
        nid = len(self.nodes)
        deps = tuple(sorted({d for d in deps if d is not None}))
        if any(d >= nid or d < 0 for d in deps):
            raise ValueError("dependencies must refer to earlier nodes")
        self.nodes.append(Node(nid, kind, **kw))
        self.preds.append(deps)
        return nid

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for v, ps in enumerate(self.preds) for u in ps]

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for v, ps in enumerate(self.preds):
            for u in ps:
                out[u].append(v)
        return out

    def census(self, op: int | None = None) -> dict[str, int]:
        """Kernel counts in the functional scheme's units (rows per kernel kind)."""
        c = Counter()
        for nd in self.nodes:
            if op is not None and nd.op != op:
                continue
            if nd.kind in ("ntt", "intt", "mod_mult", "mod_add", "automorphism", "sample"):
                c[nd.kind] += nd.count
            elif nd.kind == "base_conv":
                c["mod_mult"] += nd.src * nd.count
                c["mod_add"] += nd.src * nd.count
                c["base_conv"] += nd.count
            elif nd.kind == "transpose":
                c["transposes"] += nd.count
            elif nd.kind == "hbm_load":
                c["hbm_loads"] += 1
                c["hbm_bytes"] += nd.nbytes
        out = {k: int(c.get(k, 0)) for k in CENSUS_KINDS}
        out.update(transposes=int(c["transposes"]), hbm_loads=int(c["hbm_loads"]), hbm_bytes=int(c["hbm_bytes"]))
        return out

    def kind_histogram(self) -> dict[str, int]:
        return dict(sorted(Counter(nd.kind for nd in self.nodes).items()))

    def unit_classes(self, arch: ArchConfig) -> list[str]:
        return [unit_class(nd.kind, arch) for nd in self.nodes]


# -- per-op lowering ---------------------------------------------------------------------
class _Lowerer:
    def __init__(self, g: KernelGraph, shape: Shape, residency=None, coalesce: bool = True):
        self.g = g
        self.s = shape
        self.res = residency
        self.coalesce = coalesce
        self.buffered: tuple[str, int] | None = None  # (hint, load node) in the stream buffer
        self.hint_loads = 0
        self.op = -1
        self.op_deps: tuple[int, ...] = ()
        fp = footprint_for(shape)
        self.hint_bytes = fp["hint"]
        self.twiddle_row = (shape.N + 4 * shape.side) * (shape.W // 8)

    # primitives -----------------------------------------------------------------------
    def add(self, kind, deps, phase, **kw):
        return self.g.add(kind, _flat(deps) + self.op_deps, op=self.op, phase=phase, **kw)

    def transform(self, kind: str, rows: int, deps, phase: str) -> list[int]:
        """One node per residue transform, each followed by its transpose."""
        outs = []
        for _ in range(rows):
            t = self.add(kind, deps, phase, count=1, n=self.s.N)
            outs.append(self.add("transpose", (t,), phase, count=1, side=self.s.side))
        return outs

    def rows(self, kind: str, rows: int, deps, phase: str) -> int:
        return self.add(kind, deps, phase, count=rows, n=self.s.N)

    def hint(self, name: str) -> int | None:
        if self.res is None or self.res.resident(name):
            return None
        if self.coalesce and self.buffered and self.buffered[0] == name:
            return self.buffered[1]
        node = self.add("hbm_load", (), "hint", nbytes=self.hint_bytes)
        self.hint_loads += 1
        self.buffered = (name, node)
        return node

    # CKKS pieces ------------------------------------------------------------------------
    def key_switch(self, d, level: int, hint: str) -> tuple[int, int]:
        s = self.s
        ext = level + s.alpha
        load = self.hint(hint)
        acc0 = acc1 = None
        for digit in s.digits(level):
            src = len(digit)
            tgt = ext - src
            y = self.transform("intt", src, (d,), "ks.modup")
            bc = self.add("base_conv", y, "ks.modup", count=tgt, src=src, n=s.N)
            e = self.transform("ntt", tgt, (bc,), "ks.modup")
            deps = tuple(e) + (d, load)
            t0 = self.rows("mod_mult", ext, deps, "ks.inner")
            t1 = self.rows("mod_mult", ext, deps, "ks.inner")
            if acc0 is None:
                acc0, acc1 = t0, t1
            else:
                acc0 = self.rows("mod_add", ext, (acc0, t0), "ks.inner")
                acc1 = self.rows("mod_add", ext, (acc1, t1), "ks.inner")
        return self.mod_down(acc0, level), self.mod_down(acc1, level)

    def mod_down(self, x: int, level: int) -> int:
        s = self.s
        y = self.transform("intt", s.alpha, (x,), "ks.moddown")
        bc = self.add("base_conv", y, "ks.moddown", count=level, src=s.alpha, n=s.N)
        z = self.transform("ntt", level, (bc,), "ks.moddown")
        return self.rows("mod_add", level, tuple(z) + (x,), "ks.moddown")

    def rescale_poly(self, x: int, level: int) -> int:
        m = level - 1
        r = self.transform("intt", 1, (x,), "rescale")
        t = self.rows("mod_add", m, r, "rescale")
        t = self.rows("mod_mult", m, (t,), "rescale")
        t = self.transform("ntt", m, (t,), "rescale")
        c = self.rows("mod_mult", m, (x,), "rescale")
        return self.rows("mod_add", m, tuple(t) + (c,), "rescale")

    def sample_small(self, rows: int, phase: str) -> list[int]:
        smp = self.add("sample", (), phase, count=1, bits=SMALL_BITS * self.s.N)
        return self.transform("ntt", rows, (smp,), phase)

    def twiddles(self, transforms: int) -> int | None:
        if self.res is None or self.res.resident("twiddles") or not transforms:
            return None
        node = self.add("hbm_load", (), "twiddles", nbytes=transforms * self.twiddle_row)
        self.op_deps = self.op_deps + (node,)
        return node

    # ops ------------------------------------------------------------------------------
    def lower(self, st: Statement, env: dict, level_of: dict, track_levels: bool):
        s = self.s
        op = st.op
        args = [env.get(a, (None, None)) for a in st.args]
        lv = level_of.get(st.args[0], s.k) if st.args and st.op != "ENC" else s.k
        if not track_levels:
            lv = s.k
        if op == "KEYGEN":
            sk = self.sample_small(s.k + s.alpha, "keygen")
            a = self.add("sample", (), "keygen", count=1, bits=s.k * s.W * s.N)
            e = self.sample_small(s.k, "keygen")
            m = self.rows("mod_mult", s.k, tuple(sk) + (a,), "keygen")
            b = self.rows("mod_add", s.k, tuple(e) + (m,), "keygen")
            return (b, a), s.k
        if op == "ENC":
            lv = int(st.attr("level", s.k)) if track_levels else s.k
            v = self.sample_small(lv, "enc")
            e0 = self.sample_small(lv, "enc")
            e1 = self.sample_small(lv, "enc")
            mb = self.rows("mod_mult", lv, v, "enc")
            b = self.rows("mod_add", lv, (mb,) + tuple(e0), "enc")
            b = self.rows("mod_add", lv, (b,), "enc")
            ma = self.rows("mod_mult", lv, v, "enc")
            a = self.rows("mod_add", lv, (ma,) + tuple(e1), "enc")
            return (b, a), lv
        if op == "DEC":
            (b, a), = args
            m = self.rows("mod_mult", lv, (a,), "dec")
            return (self.rows("mod_add", lv, (b, m), "dec"), None), lv
        if op == "FADD":
            (b1, a1), (b2, a2) = args
            return (self.rows("mod_add", lv, (b1, b2), "fadd"), self.rows("mod_add", lv, (a1, a2), "fadd")), lv
        if op == "ADDCP":
            (b, a), (p, _) = args
            return (self.rows("mod_add", lv, (b, p), "addcp"), a), lv
        if op == "MULTCP":
            (b, a), (p, _) = args
            self.twiddles(2 * lv)
            mb = self.rows("mod_mult", lv, (b, p), "multcp")
            ma = self.rows("mod_mult", lv, (a, p), "multcp")
            return (self.rescale_poly(mb, lv), self.rescale_poly(ma, lv)), lv - 1
        if op == "FMUL":
            return self.fmul(args[0], args[1], lv)
        if op == "FROT":
            return self.frot(args[0], lv, int(st.attr("steps", 1)))
        if op == "FBOT":
            return self.fbot(args[0])
        raise ValueError(f"cannot lower {op}")

    def fmul(self, x, y, lv: int):
        (b1, a1), (b2, a2) = x, y
        self.twiddles(6 * lv + 4 * lv)
        d0 = self.rows("mod_mult", lv, (b1, b2), "tensor")
        m1 = self.rows("mod_mult", lv, (b1, a2), "tensor")
        m2 = self.rows("mod_mult", lv, (a1, b2), "tensor")
        d1 = self.rows("mod_add", lv, (m1, m2), "tensor")
        d2 = self.rows("mod_mult", lv, (a1, a2), "tensor")
        k0, k1 = self.key_switch(d2, lv, "relin")
        ob = self.rows("mod_add", lv, (d0, k0), "accumulate")
        oa = self.rows("mod_add", lv, (d1, k1), "accumulate")
        return (self.rescale_poly(ob, lv), self.rescale_poly(oa, lv)), lv - 1

    def frot(self, x, lv: int, steps: int):
        b, a = x
        if steps % self.s.slots == 0:
            return (b, a), lv
        self.twiddles(6 * lv)
        rb = self.rows("automorphism", lv, (b,), "automorphism")
        ra = self.rows("automorphism", lv, (a,), "automorphism")
        k0, k1 = self.key_switch(ra, lv, f"rot{steps}")
        return (self.rows("mod_add", lv, (rb, k0), "accumulate"), k1), lv

    def fbot(self, x):
        s = self.s
        b, a = x
        r = self.transform("intt", 2, (b, a), "modraise")
        nb = self.transform("ntt", s.k, r, "modraise")
        na = self.transform("ntt", s.k, r, "modraise")
        cur = (tuple(nb), tuple(na))
        for stage, recipe in FBOT_RECIPE:
            rots = FBOT_ROTATIONS.get(stage, (1,))
            for name, count in recipe:
                for i in range(count):
                    if name == "FROT":
                        cur, _ = self.frot(cur, s.k, rots[i % len(rots)])
                    elif name == "FMUL":
                        cur, _ = self.fmul(cur, cur, s.k)
                    elif name == "FADD":
                        cur = (self.rows("mod_add", s.k, (cur[0],), stage),
                               self.rows("mod_add", s.k, (cur[1],), stage))
                    elif name == "ADDCP":
                        cur = (self.rows("mod_add", s.k, (cur[0],), stage), cur[1])
                    elif name == "MULTCP":
                        mb = self.rows("mod_mult", s.k, (cur[0],), stage)
                        ma = self.rows("mod_mult", s.k, (cur[1],), stage)
                        cur = (self.rescale_poly(mb, s.k), self.rescale_poly(ma, s.k))
        return cur, s.k


def _flat(deps) -> tuple[int, ...]:
    out: list[int] = []
    stack = [deps]
    while stack:
        d = stack.pop()
        if d is None:
            continue
        if isinstance(d, (int,)):
            out.append(d)
        else:
            stack.extend(d)
    return tuple(out)


def footprint_for(shape: Shape) -> dict[str, int]:
    wb = shape.W // 8
    k, a = shape.k, shape.alpha
    return {
        "ciphertext": 2 * k * shape.N * wb,
        "hint": 2 * shape.dnum * (k + a) * shape.N * wb,
        "twiddles": (k + a) * (shape.N + 4 * shape.side) * wb,
    }


def program_hints(p: OpProgram) -> list[str]:
    from ..archmodel import fbot_hints

    out = []
    for st in p.statements:
        if st.op == "FBOT":
            out.extend(fbot_hints())
        elif st.hint:
            out.append(st.hint)
    return out


PASSES = ("reorder", "coalesce", "evict")


def lower_to_kernels(p: OpProgram, params, arch: ArchConfig | None = None, *,
                     passes: tuple[str, ...] = PASSES, track_levels: bool = False,
                     residency: bool = True) -> KernelGraph:
    """Build the kernel graph of ``p``.

    ``params`` is a functional parameter set (census-exact at its ``k``) or
    ``ModelParams`` (``k`` fixed by ``arch.W``).  Off-chip-traffic passes:
    ``reorder`` groups ops sharing a KS hint, ``coalesce`` lets consecutive
    uses of a streamed hint share one load through a one-hint stream buffer,
    and ``evict`` ranks residency candidates by use count.  Without
    ``track_levels`` every op runs at the top level, as the cost model does.
    """
    unknown = set(passes) - set(PASSES)
    if unknown:
        raise ValueError(f"unknown passes {sorted(unknown)}")
    shape = Shape.of(params, arch)
    if "reorder" in passes:
        p = reorder_for_hint_reuse(p)
    res = None
    if residency and arch is not None:
        hints = program_hints(p)
        uses = Counter(hints) if "evict" in passes else None
        mp = ModelParams(N=shape.N, Q_bits=shape.k * arch.W, dnum=shape.dnum)
        res = plan_residency(arch, mp, hints, uses)
    g = KernelGraph()
    low = _Lowerer(g, shape, res, coalesce="coalesce" in passes)
    env: dict = {}
    levels: dict = {}
    for i, st in enumerate(p.statements):
        low.op = i
        low.op_deps = ()
        if track_levels and st.op in ("FMUL", "MULTCP") and levels.get(st.args[0], shape.k) < 2:
            raise ValueError(f"line {st.line}: {st.op} needs level >= 2")
        out, lv = low.lower(st, env, levels, track_levels)
        env[st.target] = out
        levels[st.target] = lv
    g.meta.update(
        shape=shape,
        program=p,
        residency=res,
        hint_loads=low.hint_loads,
        ops=[st.op for st in p.statements],
    )
    return g
