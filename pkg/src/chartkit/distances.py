"""Channel distance measures and distance-matrix construction.

Three measures are provided: the plain Euclidean distance, the Euclidean
distance between unit-normalized channels, and the phase-insensitive
distance, i.e. the normalized distance minimized over a global phase
rotation of one argument.  The latter has the closed form::

    d*(h_k, h_l)^2 = 2 - 2 |h_k^H h_l| / (||h_k|| ||h_l||)

All functions return distances, not squared distances.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .channels import ChannelDataset, ChannelVector, DistanceMatrix
from .errors import DomainError

MEASURES = ("euclidean", "normalized", "phase_insensitive")

# Below this squared distance, 2 - 2c cancels badly; the aligned difference is
# evaluated instead (same quantity, full precision).
REFINE_BELOW = 1e-4


def _vec(h) -> np.ndarray:
    if isinstance(h, ChannelVector):
        return h.entries
    arr = np.asarray(h, dtype=np.complex128)
    if arr.ndim != 1:
        raise DomainError("a channel must be a one-dimensional vector")
    return arr


def _pair(h_k, h_l):
    a, b = _vec(h_k), _vec(h_l)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.size} vs {b.size}")
    return a, b


def _unit(h: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(h)
    if not n > 0:
        raise DomainError("channel has zero norm")
    return h / n


def dist_euclidean(h_k, h_l) -> float:
    a, b = _pair(h_k, h_l)
    return float(np.linalg.norm(a - b))


def dist_normalized(h_k, h_l) -> float:
    """Euclidean distance between the two channels scaled to unit norm; in [0, 2]."""
    a, b = _pair(h_k, h_l)
    return float(np.linalg.norm(_unit(a) - _unit(b)))


def dist_phase_insensitive(h_k, h_l) -> float:
    """Closed-form phase-insensitive distance; 0 for channels equal up to a complex scale.

    The radicand is clamped at zero.  For nearly aligned channels, where
    ``2 - 2c`` loses most of its digits, the distance is re-evaluated as
    ``||h_k/|h_k| - e^{j phi*} h_l/|h_l|||`` at the optimal phase.
    Orthogonal channels are at the maximum distance sqrt(2).
    """
    a, b = _pair(h_k, h_l)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if not (na > 0 and nb > 0):
        raise DomainError("channel has zero norm")
    ip = np.vdot(a, b)
    sq = max(0.0, 2.0 - 2.0 * abs(ip) / (na * nb))
    if sq < REFINE_BELOW and ip != 0:
        diff = a / na - (np.conj(ip) / abs(ip)) * (b / nb)
        sq = float(np.sum(diff.real ** 2 + diff.imag ** 2))
    return float(np.sqrt(sq))


def dist_phase_insensitive_variational(h_k, h_l, grid_size: int = 4096) -> float:
    """Brute-force minimum of ``||h_k/|h_k| - e^{j phi} h_l/|h_l|||`` over a phase grid.

    ``phi`` runs over ``2 pi t / grid_size`` for ``t = 0 .. grid_size-1``.
    This never uses the closed form, so it can check it.
    """
    if grid_size < 4:
        raise DomainError("grid_size must be at least 4")
    a, b = _pair(h_k, h_l)
    a, b = _unit(a), _unit(b)
    phases = np.exp(1j * 2.0 * np.pi * np.arange(grid_size) / grid_size)
    best = np.inf
    for start in range(0, grid_size, 256):
        rotated = np.multiply.outer(phases[start:start + 256], b)
        rotated -= a
        X = rotated.view(np.float64)
        best = min(best, float(np.einsum("ij,ij->i", X, X).min()))
    return float(np.sqrt(best))


def optimal_phase(h_k, h_l) -> float:
    """Phase ``phi`` in (-pi, pi] that best aligns ``e^{j phi} h_l`` with ``h_k``.

    Equal to ``-arg(h_k^H h_l)``.  Raises if the channels are orthogonal,
    since then every phase is optimal.
    """
    a, b = _pair(h_k, h_l)
    ip = np.vdot(a, b)
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    if not scale > 0:
        raise DomainError("channel has zero norm")
    if abs(ip) <= np.finfo(float).eps * a.size * scale:
        raise DomainError("phase undefined: channels are orthogonal")
    phi = -float(np.angle(ip))
    if phi <= -np.pi:
        phi += 2.0 * np.pi
    return phi


def build_distance_matrix(dataset, measure: str = "phase_insensitive",
                          n_threads: int = 1) -> DistanceMatrix:
    """Pairwise distances between all channels of a dataset.

    ``dataset`` may be a ChannelDataset or an N x M complex array.  Each
    unordered pair is evaluated once and mirrored, so the result is exactly
    symmetric.  Cost is O(M N^2).
    """
    measure = measure.replace("-", "_")
    if measure not in MEASURES:
        raise DomainError(f"unknown measure {measure!r}; choose from {MEASURES}")
    H = dataset.matrix if isinstance(dataset, ChannelDataset) else np.asarray(dataset, np.complex128)
    if H.ndim != 2:
        raise DomainError("expected an N x M channel matrix")
    if measure == "euclidean":
        values = _kernels.pair_distances(H, _kernels.KIND_EUCLIDEAN, n_threads)
        return DistanceMatrix(values)
    norms = np.linalg.norm(H, axis=1)
    bad = np.flatnonzero(~(norms > 0))
    if bad.size:
        raise DomainError(f"channel {int(bad[0])} has zero norm")
    if measure == "normalized":
        values = _kernels.pair_distances(H / norms[:, None], _kernels.KIND_EUCLIDEAN, n_threads)
    else:
        values = _kernels.pair_distances(H, _kernels.KIND_PHASE_INSENSITIVE, n_threads)
    return DistanceMatrix(values)
