"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The compiled extension is used when it imports cleanly; set
``MEMGC_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the active
implementation.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    if os.environ.get("MEMGC_PURE_PYTHON"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

import numpy as np


def _rows(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def minmax_greedy(x, first: int, count: int, impl=None):
    return (impl or _impl).minmax_greedy(_rows(x), int(first), int(count))


def adjacent_dedup(x, threshold: float, impl=None):
    return (impl or _impl).adjacent_dedup(_rows(x), float(threshold))


def capacity_evict(x, capacity: int, impl=None):
    return (impl or _impl).capacity_evict(_rows(x), int(capacity))


def available_backends() -> dict:
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
