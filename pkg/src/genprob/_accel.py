"""Backend selection for the hot kernels.

``GENPROB_BACKEND=numpy`` forces the pure-numpy path. Otherwise numba is used
when importable. ``GENPROB_NUMBA_CACHE=0`` turns off the on-disk JIT cache.
numba is imported on the first kernel call, not at package import.
"""

from __future__ import annotations

import functools
import importlib.util
import os

BACKEND_ENV = "GENPROB_BACKEND"
BACKENDS = ("numba", "numpy")

HAS_NUMBA = importlib.util.find_spec("numba") is not None


def default_backend() -> str:
    requested = os.environ.get(BACKEND_ENV, "numba").strip().lower() or "numba"
    if requested not in BACKENDS:
        raise ValueError(f"{BACKEND_ENV} must be one of {BACKENDS}, got {requested!r}")
    if requested == "numba" and not HAS_NUMBA:
        return "numpy"
    return requested


def njit(fn):
    """Lazily compiled ``numba.njit(cache=True, nogil=True)``; ``fn`` itself without numba."""
    if not HAS_NUMBA:
        return fn
    compiled = None

    @functools.wraps(fn)
    def dispatch(*args):
        nonlocal compiled
        if compiled is None:
            import numba

            cache = os.environ.get("GENPROB_NUMBA_CACHE", "1") != "0"
            compiled = numba.njit(cache=cache, nogil=True)(fn)
        return compiled(*args)

    dispatch.py_func = fn
    return dispatch
