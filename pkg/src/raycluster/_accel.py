"""Backend selection for the compiled kernels.

Set ``RAYCLUSTER_BACKEND=numpy`` to run the pure-numpy fallback path. The
default is ``numba`` when it imports cleanly.
"""
import os

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    numba = None
    HAS_NUMBA = False

ENV_FLAG = "RAYCLUSTER_BACKEND"
BACKENDS = ("numba", "numpy")


def default_backend():
    requested = os.environ.get(ENV_FLAG, "").strip().lower()
    if requested == "numpy" or not HAS_NUMBA:
        return "numpy"
    if requested not in ("", "numba"):
        raise ValueError(f"{ENV_FLAG} must be one of {BACKENDS}, got {requested!r}")
    return "numba"


def njit(func):
    """``numba.njit(cache=True)`` or the identity when numba is missing."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True)(func)
