"""JIT switch for the hot kernels.

Set ``ROTORROUTER_NO_NUMBA=1`` before import to run every kernel as plain
Python over numpy arrays. Results are identical on both paths; only speed
differs.
"""
import os

_flag = os.environ.get("ROTORROUTER_NO_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not DISABLED


def njit(func=None, **kwargs):
    """``numba.njit(cache=True, nogil=True)`` or a no-op, per ``USE_NUMBA``."""

    def wrap(f):
        if not USE_NUMBA:
            return f
        opts = {"cache": True, "nogil": True}
        opts.update(kwargs)
        return numba.njit(**opts)(f)

    if func is not None:
        return wrap(func)
    return wrap


def backend() -> str:
    return "numba" if USE_NUMBA else "python"
