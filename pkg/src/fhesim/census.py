"""Kernel census: count residue-vector kernel invocations.

Functional code calls ``record(kind, n)`` for every kernel it runs on an
``N``-element residue row.  Counting is a no-op unless a ``census()`` block is
active; nested blocks each see every event recorded inside them.
"""
from __future__ import annotations

from collections import Counter
from contextlib import contextmanager
from contextvars import ContextVar

KINDS = ("ntt", "intt", "mod_mult", "mod_add", "base_conv", "automorphism", "sample")

_active: ContextVar[tuple[Counter, ...]] = ContextVar("fhesim_census", default=())


@contextmanager
def census():
    counter: Counter = Counter()
    token = _active.set(_active.get() + (counter,))
    try:
        yield counter
    finally:
        _active.reset(token)


def record(kind: str, n: int = 1) -> None:
    if n:
        for c in _active.get():
            c[kind] += n


def as_dict(counter: Counter) -> dict[str, int]:
    return {k: int(counter.get(k, 0)) for k in KINDS}
