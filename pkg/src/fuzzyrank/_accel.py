"""Optional numba acceleration.

Set ``FUZZYRANK_NO_NUMBA=1`` to force the pure-numpy kernels. When numba is
not importable the numpy path is used automatically.
"""

import os

_DISABLED = os.environ.get("FUZZYRANK_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(func):
    """Compile ``func`` with numba (nopython, nogil, cached) when available.

    Without numba the function is returned unchanged so it can still be
    called (slowly) from tests.
    """
    if not HAVE_NUMBA:
        return func
    return _njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
