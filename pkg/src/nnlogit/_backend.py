"""Kernel backend selection.

``NNLOGIT_BACKEND=numpy`` forces the vectorized numpy kernels; anything else
(the default) uses the numba kernels when numba imports.
"""

import os
from contextlib import contextmanager

from . import _kernels_numpy
from ._jit import NUMBA_AVAILABLE

_current = None


def _resolve(name):
    name = (name or "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
    if name == "numba" and NUMBA_AVAILABLE:
        from . import _kernels_numba

        return "numba", _kernels_numba
    return "numpy", _kernels_numpy


def set_backend(name):
    global _current
    _current = _resolve(name)
    return _current[0]


def backend_name():
    if _current is None:
        set_backend(os.environ.get("NNLOGIT_BACKEND"))
    return _current[0]


def kernels():
    if _current is None:
        set_backend(os.environ.get("NNLOGIT_BACKEND"))
    return _current[1]


@contextmanager
def use_backend(name):
    global _current
    saved = _current
    set_backend(name)
    try:
        yield backend_name()
    finally:
        _current = saved
