"""Numba toggle.

Kernels are compiled with numba unless ``ALPHA_MST_NUMBA=0`` is set in the
environment (or numba cannot be imported).  Every jitted kernel has a
numpy counterpart; callers pick one through :func:`use_numba`.
"""
import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

_FLAG = os.environ.get("ALPHA_MST_NUMBA", "1").strip().lower()
NUMBA_ENABLED = _numba is not None and _FLAG not in ("0", "false", "no", "off")


def use_numba():
    return NUMBA_ENABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is available, identity otherwise.

    The decorated function keeps a ``py_func`` attribute either way so that
    benchmarks can call the interpreted version.
    """
    kwargs.setdefault("cache", True)

    def wrap(fn):
        if _numba is None:
            fn.py_func = fn
            return fn
        return _numba.njit(**kwargs)(fn)

    if args and callable(args[0]):
        return wrap(args[0])
    return wrap
