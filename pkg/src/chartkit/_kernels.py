"""Select the kernel backend at import time.

The compiled ``_ckernels`` extension is preferred.  Set ``CHARTKIT_PURE_PYTHON=1``
to force the numpy/scipy fallback.
"""

import os

import numpy as np

if os.environ.get("CHARTKIT_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:
        from . import _pykernels as _impl
        BACKEND = "python"

KIND_EUCLIDEAN = 0
KIND_PHASE_INSENSITIVE = 1


def backends():
    """Available kernel modules keyed by name (for tests and benchmarks)."""
    from . import _pykernels
    found = {"python": _pykernels}
    try:
        from . import _ckernels
        found["compiled"] = _ckernels
    except ImportError:
        pass
    return found


def pair_distances(H, kind, n_threads=1, impl=None):
    X = np.ascontiguousarray(H, dtype=np.complex128).view(np.float64)
    return (impl or _impl).pair_distances(X, int(kind), int(n_threads))


def all_sources_dijkstra(indptr, indices, weights, n_threads=1, impl=None):
    return (impl or _impl).all_sources_dijkstra(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int32),
        np.ascontiguousarray(weights, dtype=np.float64),
        int(n_threads),
    )
