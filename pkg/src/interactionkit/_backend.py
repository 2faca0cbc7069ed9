"""Selects the compute backend for the hot kernels.

Set ``INTERACTIONKIT_DISABLE_NUMBA=1`` before import to force the pure-numpy
path even when numba is installed.
"""

import os

_FLAG = os.environ.get("INTERACTIONKIT_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in {"1", "true", "yes", "on"}
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)
