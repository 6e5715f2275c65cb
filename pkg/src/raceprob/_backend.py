"""Kernel backend selection.

Hot numeric kernels in this package are written as plain scalar/loop code
and compiled with numba's ``@njit`` when available.  Setting the environment
variable ``RACEPROB_NO_NUMBA=1`` before import disables compilation; the
same functions then run as ordinary Python, and the array-heavy operations
(lattice sweeps, finite sums) dispatch to vectorized numpy fallbacks instead
of the compiled loops.
"""

from __future__ import annotations

import os

_flag = os.environ.get("RACEPROB_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in {"1", "true", "yes", "on"}

if not NUMBA_DISABLED:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

if not HAVE_NUMBA:

    def njit(*args, **kwargs):  # type: ignore[misc]
        """No-op replacement for numba.njit."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorate(fn):
            return fn

        return decorate


def using_numba() -> bool:
    """True when kernels run through numba-compiled code."""
    return HAVE_NUMBA
