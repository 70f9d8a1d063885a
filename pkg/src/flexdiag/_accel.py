"""JIT switch for the search kernels.

Kernels are compiled with numba unless ``FLEXDIAG_JIT`` is set to ``0``
(or numba is not importable), in which case the same functions run as
plain Python over numpy arrays.
"""
import os

JIT_ENABLED = os.environ.get("FLEXDIAG_JIT", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover
    _njit = None
    JIT_ENABLED = False


def jit(fn):
    if JIT_ENABLED:
        return _njit(cache=True, nogil=True)(fn)
    return fn
