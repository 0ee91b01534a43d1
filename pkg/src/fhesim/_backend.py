"""Kernel backend selection.

Hot loops ship in two flavours: a numba ``@njit`` kernel and a pure-numpy
equivalent.  ``FHESIM_BACKEND=numpy`` forces the numpy path; the default is
numba when it imports cleanly.  The choice is made once, at import time.
"""
from __future__ import annotations

import os

_requested = os.environ.get("FHESIM_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"FHESIM_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and _requested == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(fn=None, **kwargs):
    """``numba.njit(cache=True)`` when numba exists, identity otherwise.

    Kernels decorated with this are always importable; whether they are the
    *selected* implementation is decided by ``pick``.
    """
    kwargs.setdefault("cache", True)

    def wrap(f):
        if _numba is None:
            return f
        return _numba.njit(**kwargs)(f)

    if fn is None:
        return wrap
    return wrap(fn)


def pick(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl
