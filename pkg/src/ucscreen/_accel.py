"""Numba switch.

Set ``UCSCREEN_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
implementation. The flag is read once at import time.
"""

from __future__ import annotations

import os

_FLAG = "UCSCREEN_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
NUMBA_DISABLED = os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise.

    Compilation is still lazy, so decorating a kernel costs nothing when the
    numpy backend is selected.
    """
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


def default_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
