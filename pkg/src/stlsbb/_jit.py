"""JIT toggle for the numeric kernels.

Kernels compile with numba when it is importable, unless the environment
variable STLSBB_DISABLE_JIT is set to a truthy value, in which case the
same functions run as plain numpy.  The choice is made once at import.
"""

import os

_DISABLE = os.environ.get("STLSBB_DISABLE_JIT", "").strip().lower() in {
    "1", "true", "yes", "on",
}

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _njit = None
    HAVE_NUMBA = False

JIT_ENABLED = HAVE_NUMBA and not _DISABLE


def maybe_jit(func):
    """Compile func with numba when enabled, else return it unchanged."""
    if JIT_ENABLED:
        return _njit(cache=True)(func)
    return func
