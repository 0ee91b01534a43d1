"""List-scheduling kernels (numba and pure-Python heapq flavours).

Both order the ready queue of each unit class by the integer key
``(max_prio - prio) * n + id`` (longest remaining path first, lower id on
ties) and free units lowest-index first, so they produce identical schedules.
"""
from __future__ import annotations

import heapq

import numpy as np

from .._backend import njit, pick


@njit
def _bottom_levels_nb(lat, indptr, succ):
    n = lat.shape[0]
    prio = np.zeros(n, np.int64)
    for v in range(n - 1, -1, -1):
        best = 0
        for e in range(indptr[v], indptr[v + 1]):
            s = succ[e]
            if prio[s] > best:
                best = prio[s]
        prio[v] = lat[v] + best
    return prio


def _bottom_levels_py(lat, indptr, succ):
    n = lat.shape[0]
    prio = np.zeros(n, np.int64)
    for v in range(n - 1, -1, -1):
        s = succ[indptr[v]:indptr[v + 1]]
        prio[v] = lat[v] + (prio[s].max() if s.size else 0)
    return prio


@njit
def _push(heap, size, key):
    i = size
    heap[i] = key
    while i > 0:
        p = (i - 1) >> 1
        if heap[p] <= heap[i]:
            break
        heap[p], heap[i] = heap[i], heap[p]
        i = p
    return size + 1


@njit
def _pop(heap, size):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        c = l
        if l + 1 < size and heap[l + 1] < heap[l]:
            c = l + 1
        if heap[i] <= heap[c]:
            break
        heap[i], heap[c] = heap[c], heap[i]
        i = c
    return top, size


@njit
def _list_schedule_nb(lat, cls, prio, indptr, succ, indeg0, n_units):
    n = lat.shape[0]
    ncls = n_units.shape[0]
    base = np.zeros(ncls + 1, np.int64)
    for c in range(ncls):
        base[c + 1] = base[c] + n_units[c]
    busy = np.zeros(base[ncls], np.bool_)
    ready = np.zeros((ncls, n), np.int64)
    rsize = np.zeros(ncls, np.int64)
    running = np.zeros(n, np.int64)
    nrun = 0
    start = np.zeros(n, np.int64)
    end = np.zeros(n, np.int64)
    unit = np.zeros(n, np.int64)
    indeg = indeg0.copy()
    pmax = 0
    for v in range(n):
        if prio[v] > pmax:
            pmax = prio[v]
    for v in range(n):
        if indeg[v] == 0:
            c = cls[v]
            rsize[c] = _push(ready[c], rsize[c], (pmax - prio[v]) * n + v)
    t = 0
    done = 0
    while done < n:
        for c in range(ncls):
            u = base[c]
            while rsize[c] > 0 and u < base[c + 1]:
                if busy[u]:
                    u += 1
                    continue
                key, rsize[c] = _pop(ready[c], rsize[c])
                v = key % n
                busy[u] = True
                start[v] = t
                end[v] = t + lat[v]
                unit[v] = u
                nrun = _push(running, nrun, end[v] * n + v)
                u += 1
        if nrun == 0:
            return start, end, unit, False
        t = running[0] // n
        while nrun > 0 and running[0] // n == t:
            key, nrun = _pop(running, nrun)
            v = key % n
            busy[unit[v]] = False
            done += 1
            for e in range(indptr[v], indptr[v + 1]):
                s = succ[e]
                indeg[s] -= 1
                if indeg[s] == 0:
                    c = cls[s]
                    rsize[c] = _push(ready[c], rsize[c], (pmax - prio[s]) * n + s)
    return start, end, unit, True


def _list_schedule_py(lat, cls, prio, indptr, succ, indeg0, n_units):
    n = lat.shape[0]
    ncls = n_units.shape[0]
    base = np.concatenate([[0], np.cumsum(n_units)]).astype(np.int64)
    idle = [list(range(int(base[c]), int(base[c + 1]))) for c in range(ncls)]
    ready: list[list[int]] = [[] for _ in range(ncls)]
    running: list[int] = []
    start = np.zeros(n, np.int64)
    end = np.zeros(n, np.int64)
    unit = np.zeros(n, np.int64)
    indeg = indeg0.copy()
    pmax = int(prio.max()) if n else 0
    for v in range(n):
        if indeg[v] == 0:
            heapq.heappush(ready[cls[v]], (pmax - int(prio[v])) * n + v)
    t = done = 0
    while done < n:
        for c in range(ncls):
            while ready[c] and idle[c]:
                v = heapq.heappop(ready[c]) % n
                u = heapq.heappop(idle[c])
                start[v], end[v], unit[v] = t, t + lat[v], u
                heapq.heappush(running, int(end[v]) * n + v)
        if not running:
            return start, end, unit, False
        t = running[0] // n
        while running and running[0] // n == t:
            v = heapq.heappop(running) % n
            heapq.heappush(idle[cls[v]], int(unit[v]))
            done += 1
            for s in succ[indptr[v]:indptr[v + 1]]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    heapq.heappush(ready[cls[s]], (pmax - int(prio[s])) * n + int(s))
    return start, end, unit, True


bottom_levels = pick(_bottom_levels_nb, _bottom_levels_py)
list_schedule = pick(_list_schedule_nb, _list_schedule_py)
