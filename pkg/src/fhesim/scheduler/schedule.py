"""Static mapping of kernel graphs onto function units and list scheduling."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ..archmodel import ArchConfig, CostReport, cost_kernel
from ..archmodel.cost import COUNT_KEYS, UNIT_CLASSES, unit_class
from .kernels import bottom_levels, list_schedule
from .lower import KernelGraph


class ConfigurationError(ValueError):
    pass


def function_units(arch: ArchConfig) -> dict[str, int]:
    """Schedulable units per class: the chip's lanes of each class split into groups."""
    g = arch.sched_groups
    units = {"ntt": g, "modarith": g, "auto": g, "trng": g, "hbm": arch.hbm_count}
    units["tu" if arch.tu_enabled else "noc"] = g
    return units


@dataclass(frozen=True)
class Interval:
    unit: int
    kernel: int
    start: int
    end: int


@dataclass
class Timeline:
    intervals: list[Interval]
    unit_names: list[str]
    makespan: int
    critical_path: int
    serial_sum: int
    busy: list[int] = field(default_factory=list)

    @property
    def utilization(self) -> dict[str, float]:
        if not self.makespan:
            return {u: 0.0 for u in self.unit_names}
        return {u: b / self.makespan for u, b in zip(self.unit_names, self.busy)}

    def by_unit(self) -> dict[str, list[Interval]]:
        out: dict[str, list[Interval]] = {u: [] for u in self.unit_names}
        for iv in self.intervals:
            out[self.unit_names[iv.unit]].append(iv)
        for ivs in out.values():
            ivs.sort(key=lambda iv: (iv.start, iv.kernel))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("unit,kernel,start,end\n")
        for iv in sorted(self.intervals, key=lambda iv: (iv.unit, iv.start, iv.kernel)):
            buf.write(f"{self.unit_names[iv.unit]},{iv.kernel},{iv.start},{iv.end}\n")
        return buf.getvalue()


def _csr(g: KernelGraph):
    n = len(g)
    succ = g.successors()
    indptr = np.zeros(n + 1, np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + len(succ[v])
    flat = np.fromiter((s for ss in succ for s in ss), np.int64, count=int(indptr[-1]))
    indeg = np.fromiter((len(p) for p in g.preds), np.int64, count=n)
    return indptr, flat, indeg


def map_and_schedule(g: KernelGraph, arch: ArchConfig, units: dict[str, int] | None = None
                     ) -> tuple[Timeline, CostReport]:
    """List-schedule ``g`` with critical-path priority (ties: lower node id).

    Latency of a node is its kernel cost on one unit (a ``1/units`` share of the
    chip's lanes of that class) unless the node carries an explicit latency.
    """
    units = dict(function_units(arch) if units is None else units)
    classes = [c for c in UNIT_CLASSES if c in units] + sorted(set(units) - set(UNIT_CLASSES))
    n = len(g)
    node_cls = [unit_class(nd.kind, arch) for nd in g.nodes]
    missing = sorted({c for c in node_cls if units.get(c, 0) <= 0})
    if missing:
        raise ConfigurationError(f"no function unit available for kernel class(es) {missing}")
    cls_index = {c: i for i, c in enumerate(classes)}
    report = CostReport.empty(arch)
    lat = np.zeros(n, np.int64)
    cache: dict = {}
    for i, nd in enumerate(g.nodes):
        key = (nd.kernel, node_cls[i])
        rep = cache.get(key)
        if rep is None:
            rep = cache[key] = cost_kernel(nd.kernel, arch, 1.0 / units[node_cls[i]])
        lat[i] = rep.cycles if nd.latency is None else nd.latency
        for k in COUNT_KEYS:
            report.counts[k] += rep.counts.get(k, 0)
        for k, v in rep.quantities.items():
            report.quantities[k] += v
        for ch, v in rep.traffic.items():
            report.traffic[ch] += v
    report.counts["hint_loads"] = int(g.meta.get("hint_loads", 0))
    cls_arr = np.fromiter((cls_index[c] for c in node_cls), np.int64, count=n)
    n_units = np.array([units[c] for c in classes], np.int64)
    indptr, succ, indeg = _csr(g)
    prio = bottom_levels(lat, indptr, succ) if n else np.zeros(0, np.int64)
    start, end, unit, ok = list_schedule(lat, cls_arr, prio, indptr, succ, indeg, n_units)
    if not ok:
        raise ValueError("kernel graph has a cycle")
    makespan = int(end.max()) if n else 0
    crit = int(prio.max()) if n else 0
    serial = int(lat.sum())
    names = [f"{c}{j}" for c in classes for j in range(units[c])]
    busy = np.zeros(len(names), np.int64)
    np.add.at(busy, unit, end - start)
    intervals = [Interval(int(unit[v]), v, int(start[v]), int(end[v])) for v in range(n)]
    tl = Timeline(intervals, names, makespan, crit, serial, busy.tolist())
    check_timeline(g, tl)
    report.cycles = makespan
    offset = 0
    for c in classes:
        report.breakdown[c] = int(busy[offset:offset + units[c]].sum()) if c in report.breakdown else 0
        offset += units[c]
    report.labels.update(arch=arch.name, makespan=makespan, critical_path=crit, serial_sum=serial,
                         nodes=n, edges=int(indptr[-1]) if n else 0)
    return tl, report


def check_timeline(g: KernelGraph, tl: Timeline) -> None:
    """Assert dependency order, exclusive units and the makespan bounds."""
    end = {iv.kernel: iv.end for iv in tl.intervals}
    start = {iv.kernel: iv.start for iv in tl.intervals}
    for u, v in g.edges:
        if end[u] > start[v]:
            raise AssertionError(f"edge {u}->{v} violated: {end[u]} > {start[v]}")
    for ivs in tl.by_unit().values():
        for a, b in zip(ivs, ivs[1:]):
            if a.end > b.start:
                raise AssertionError(f"overlap on one unit: kernels {a.kernel} and {b.kernel}")
    if not tl.critical_path <= tl.makespan <= tl.serial_sum:
        raise AssertionError(
            f"makespan {tl.makespan} outside [{tl.critical_path}, {tl.serial_sum}]")
