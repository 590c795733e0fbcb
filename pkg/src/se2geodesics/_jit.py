"""Optional numba acceleration.

Set ``SE2GEODESICS_DISABLE_NUMBA=1`` (or run without numba installed) to use
the pure-numpy fallbacks in :mod:`se2geodesics.kernels`.
"""

import os

_DISABLED = os.environ.get("SE2GEODESICS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAS_NUMBA = _numba is not None
USE_NUMBA = HAS_NUMBA and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise.

    Kernels are always compiled lazily when numba exists, so the numpy path
    and the jitted path can be compared within one process.
    """
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)
