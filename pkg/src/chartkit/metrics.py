"""Neighborhood-preservation scores (continuity, trustworthiness) and a PCA baseline.

Ranks are 1-based, exclude the point itself, and break distance ties by
ascending index.  With ``r`` the rank table in space and ``r_hat`` the one
in the chart::

    CT(K) = 1 - 2 / (N K (2N - 3K - 1)) * sum_i sum_{j in V_i} (r_hat(i, j) - K)

where ``V_i`` holds the K nearest spatial neighbors of ``i`` that are not
among its K nearest chart neighbors.  Trustworthiness swaps the roles of
space and chart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channels import ChannelDataset, Chart
from .errors import DomainError
from .isomap import leading_eigenpairs


def _points(x) -> np.ndarray:
    if isinstance(x, Chart):
        return x.points
    P = np.asarray(x, dtype=np.float64)
    return P[:, None] if P.ndim == 1 else P


def _sq_distances(P: np.ndarray) -> np.ndarray:
    sq = np.zeros((P.shape[0], P.shape[0]))
    for c in range(P.shape[1]):
        diff = P[:, c, None] - P[None, :, c]
        sq += diff * diff
    return sq


def rank_table(points) -> np.ndarray:
    """``R[i, j]`` = proximity rank of point j seen from point i; ``R[i, i] = 0``.

    Each row is a permutation of 1..N-1 over the other points.
    """
    P = _points(points)
    n = P.shape[0]
    if n < 2:
        raise DomainError("rank table needs at least two points")
    if not np.all(np.isfinite(P)):
        raise DomainError("coordinates must be finite")
    sq = _sq_distances(P)
    np.fill_diagonal(sq, -1.0)
    order = np.argsort(sq, axis=1, kind="stable")
    ranks = np.empty((n, n), dtype=np.int64)
    np.put_along_axis(ranks, order, np.broadcast_to(np.arange(n), (n, n)), axis=1)
    return ranks


def check_k(n: int, K: int) -> None:
    if not (1 <= K and 3 * K < 2 * n - 1):
        raise DomainError(f"K={K} is invalid for N={n}: need 1 <= K < (2N-1)/3")


def _penalty_score(ranks_ref: np.ndarray, ranks_cmp: np.ndarray, K: int) -> float:
    n = ranks_ref.shape[0]
    check_k(n, K)
    mask = (ranks_ref >= 1) & (ranks_ref <= K) & (ranks_cmp > K)
    penalty = int(np.sum(ranks_cmp[mask] - K))
    return 1.0 - 2.0 * penalty / (n * K * (2 * n - 3 * K - 1))


def _ranks_pair(positions, chart):
    P, Z = _points(positions), _points(chart)
    if P.shape[0] != Z.shape[0]:
        raise DomainError(f"{P.shape[0]} positions but {Z.shape[0]} chart points")
    return rank_table(P), rank_table(Z)


def continuity(positions, chart, K: int) -> float:
    """Penalizes spatial neighbors that are not chart neighbors; 1 is perfect."""
    r, r_hat = _ranks_pair(positions, chart)
    return _penalty_score(r, r_hat, K)


def trustworthiness(positions, chart, K: int) -> float:
    """Penalizes chart neighbors that are not spatial neighbors; 1 is perfect."""
    r, r_hat = _ranks_pair(positions, chart)
    return _penalty_score(r_hat, r, K)


@dataclass(frozen=True)
class QualityCurve:
    name: str
    ks: tuple
    scores: tuple

    def __len__(self):
        return len(self.ks)

    def mean(self) -> float:
        return float(np.mean(self.scores))


def quality_curves(positions, chart, k_list: Iterable[int]):
    """Continuity and trustworthiness curves over ``k_list`` (rank tables computed once)."""
    ks = tuple(int(k) for k in k_list)
    r, r_hat = _ranks_pair(positions, chart)
    n = r.shape[0]
    for K in ks:
        check_k(n, K)
    ct = tuple(_penalty_score(r, r_hat, K) for K in ks)
    tw = tuple(_penalty_score(r_hat, r, K) for K in ks)
    return QualityCurve("CT", ks, ct), QualityCurve("TW", ks, tw)


def stacked_real(dataset) -> np.ndarray:
    """Channels as real rows ``[Re h, Im h]`` of length 2M."""
    H = dataset.matrix if isinstance(dataset, ChannelDataset) else np.asarray(dataset, np.complex128)
    return np.hstack([H.real, H.imag])


def pca_baseline(dataset, dim: int = 2) -> Chart:
    """Project centered real-stacked channels on their top ``dim`` principal directions.

    Uses the same subspace eigensolver as classical MDS, applied to the
    (population) covariance matrix.
    """
    X = stacked_real(dataset)
    n, p = X.shape
    if not n > dim:
        raise DomainError(f"need N > D' (N={n}, D'={dim})")
    if dim > p:
        raise DomainError(f"D'={dim} exceeds the feature dimension {p}")
    Xc = X - X.mean(axis=0)
    C = (Xc.T @ Xc) / n
    w, V, _ = leading_eigenpairs(C, dim)
    if w[-1] <= 1e-12 * max(w[0], np.finfo(float).tiny):
        raise DomainError(f"data has rank below D'={dim}")
    return Chart(Xc @ V)
