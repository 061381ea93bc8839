"""Numba switch for the numeric kernels.

Set ``PYQU_DISABLE_NUMBA=1`` to force the pure-numpy paths. When numba is
not importable the numpy paths are used as well.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("PYQU_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the dev environment
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _FLAG in ("", "0", "false", "no")


def njit(fn):
    """Compile ``fn`` with numba when available, else return it untouched."""
    if not HAS_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
