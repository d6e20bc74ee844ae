"""Numba switch.

Set ``MVGEG_NUMBA=0`` (or ``off``/``false``) to force the pure-numpy kernels.
Without numba installed the numpy path is used regardless.
"""
import os

_FLAG = os.environ.get("MVGEG_NUMBA", "1").strip().lower()

try:
    import numba  # noqa: F401
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    njit = None

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "off", "false", "no")


def jit(func):
    """``njit(cache=True)`` when numba is enabled, identity otherwise."""
    if USE_NUMBA:
        return njit(cache=True)(func)
    return func
