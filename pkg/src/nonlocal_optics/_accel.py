"""Optional numba acceleration.

Set ``NONLOCAL_OPTICS_DISABLE_NUMBA=1`` to force the pure-numpy kernels.
The flag is read once, at import time.
"""

import os

DISABLE_ENV = "NONLOCAL_OPTICS_DISABLE_NUMBA"

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

NUMBA_AVAILABLE = _numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get(DISABLE_ENV, "").strip().lower() not in (
    "1",
    "true",
    "yes",
    "on",
)


def njit(fn):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if _numba is None:
        return fn
    return _numba.njit(cache=True, nogil=True)(fn)
