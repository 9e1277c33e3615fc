"""Selects the compiled kernels when available, else the NumPy fallback.

Set ``FRIEDRICHS_BACKEND=python`` to force the fallback.
"""
import os
from contextlib import contextmanager

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

_requested = os.environ.get("FRIEDRICHS_BACKEND", "").strip().lower()
if _requested and _requested not in _BACKENDS:
    raise ImportError(f"FRIEDRICHS_BACKEND={_requested!r} is not available; have {sorted(_BACKENDS)}")
_active = _requested or ("cython" if _compiled is not None else "python")


def available():
    return sorted(_BACKENDS)


def name():
    return _active


def face_sum(*args):
    return _BACKENDS[_active].face_sum(*args)


@contextmanager
def use(backend):
    global _active
    if backend not in _BACKENDS:
        raise ValueError(f"backend {backend!r} not available; have {available()}")
    previous, _active = _active, backend
    try:
        yield
    finally:
        _active = previous
