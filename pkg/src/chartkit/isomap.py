"""Isomap: k-NN graph, graph geodesics, classical MDS, and the charting pipeline."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .channels import ChannelDataset, Chart, DistanceMatrix
from .distances import build_distance_matrix
from .errors import ConnectivityError, ConvergenceError, DomainError, StageError

EIG_TOL = 1e-10
EIG_MAX_ITER = 100_000
EIG_GUARD_VECTORS = 8


@dataclass(frozen=True, eq=False)
class NeighborhoodGraph:
    """Undirected weighted graph in CSR form (each edge stored in both directions).

    Neighbor lists are sorted by index.
    """

    node_count: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    bridges: tuple = ()

    def neighbors(self, i: int):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.weights[lo:hi].tolist()))

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_set(self) -> set:
        rows = np.repeat(np.arange(self.node_count), self.degree())
        return {(int(i), int(j)) for i, j in zip(rows, self.indices) if i < j}

    def components(self) -> np.ndarray:
        return connected_components(self._sparse(), directed=False)[1]

    def _sparse(self):
        from scipy.sparse import csr_matrix
        n = self.node_count
        return csr_matrix((self.weights, self.indices, self.indptr), shape=(n, n))

    def is_symmetric(self) -> bool:
        A = self._sparse()
        diff = A - A.T
        return diff.nnz == 0 or not np.any(diff.data)


def _graph_from_pairs(n: int, rows: np.ndarray, cols: np.ndarray, D: np.ndarray,
                      bridges=()) -> NeighborhoodGraph:
    """Union of the given directed pairs and their reverses, weighted from ``D``."""
    r = np.concatenate([rows, cols])
    c = np.concatenate([cols, rows])
    keys = np.unique(r.astype(np.int64) * n + c)
    r, c = keys // n, keys % n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(r, minlength=n), out=indptr[1:])
    return NeighborhoodGraph(n, indptr, c.astype(np.int32), D[r, c].astype(np.float64),
                             tuple(bridges))


def knn_graph(distances, k: int) -> NeighborhoodGraph:
    """Each node links to its ``k`` nearest others (ties to the smaller index); union-symmetrized."""
    D = np.asarray(distances, dtype=np.float64)
    n = D.shape[0]
    if not 1 <= k <= n - 1:
        raise DomainError(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
    work = D.copy()
    np.fill_diagonal(work, np.inf)
    nearest = np.argsort(work, axis=1, kind="stable")[:, :k]
    rows = np.repeat(np.arange(n), k)
    return _graph_from_pairs(n, rows, nearest.ravel(), D)


def ensure_connected(graph: NeighborhoodGraph, distances, policy: str = "bridge") -> NeighborhoodGraph:
    """Join components with minimum-distance edges (``bridge``) or refuse (``fail``).

    Each bridge is the globally shortest pair between two distinct components;
    ties go to the lexicographically smallest (i, j).
    """
    if policy not in ("bridge", "fail"):
        raise DomainError(f"connectivity policy must be 'bridge' or 'fail', got {policy!r}")
    D = np.asarray(distances, dtype=np.float64)
    labels = graph.components()
    n_comp = labels.max() + 1 if labels.size else 0
    if n_comp <= 1:
        return graph
    if policy == "fail":
        sizes = np.bincount(labels)
        raise ConnectivityError(
            f"neighborhood graph has {n_comp} components of sizes {tuple(int(s) for s in sizes)}",
            sizes.tolist())
    # Kruskal over inter-component pairs sorted by (distance, i, j) adds the
    # same edges as repeatedly taking the globally shortest bridge.
    iu, ju = np.triu_indices(graph.node_count, 1)
    cross = labels[iu] != labels[ju]
    iu, ju = iu[cross], ju[cross]
    order = np.argsort(D[iu, ju], kind="stable")
    parent = list(range(n_comp))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    bridges = list(graph.bridges)
    remaining = n_comp - 1
    for idx in order:
        i, j = int(iu[idx]), int(ju[idx])
        a, b = find(labels[i]), find(labels[j])
        if a == b:
            continue
        parent[max(a, b)] = min(a, b)
        bridges.append((i, j))
        remaining -= 1
        if remaining == 0:
            break
    rows = np.repeat(np.arange(graph.node_count), graph.degree())
    cols = graph.indices.astype(np.int64)
    new_edges = np.array(bridges[len(graph.bridges):], dtype=np.int64).reshape(-1, 2)
    rows = np.concatenate([rows, new_edges[:, 0]])
    cols = np.concatenate([cols, new_edges[:, 1]])
    return _graph_from_pairs(graph.node_count, rows, cols, D, bridges)


def geodesic_distances(graph: NeighborhoodGraph, n_threads: int = 1) -> DistanceMatrix:
    """All-pairs shortest-path lengths over the graph (Dijkstra from every node)."""
    labels = graph.components()
    if labels.size and labels.max() > 0:
        sizes = np.bincount(labels)
        raise ConnectivityError(
            f"cannot compute geodesics: graph has {len(sizes)} components "
            f"of sizes {tuple(int(s) for s in sizes)}", sizes.tolist())
    G = _kernels.all_sources_dijkstra(graph.indptr, graph.indices, graph.weights, n_threads)
    # both directions of a pair sum the same edges in reverse order; keep one
    upper = np.triu(G, 1)
    return DistanceMatrix(upper + upper.T)


def double_center(D) -> np.ndarray:
    """``-1/2 J (D o D) J`` with ``J = I - 11^T/N``, exactly symmetric."""
    S = np.asarray(D, dtype=np.float64) ** 2
    r = S.mean(axis=1)
    g = r.mean()
    return -0.5 * ((S - (r[:, None] + r[None, :])) + g)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.where(V[idx, np.arange(V.shape[1])] < 0, -1.0, 1.0)
    return V * signs


def leading_eigenpairs(B: np.ndarray, count: int, tol: float = EIG_TOL,
                       max_iter: int = EIG_MAX_ITER, guard: int = EIG_GUARD_VECTORS):
    """Largest ``count`` eigenpairs of a symmetric matrix by subspace iteration.

    The block starts from the first ``count + guard`` identity columns and is
    refined with a Rayleigh-Ritz step every sweep.  When the block sees a
    negative Ritz value, the iteration is shifted by its magnitude so that
    large negative eigenvalues cannot crowd out the leading positive ones.
    Stops once every wanted pair has ``||B v - lam v|| <= tol * ||B||``, with
    ``||B||`` estimated by the largest Ritz magnitude.  Eigenvalues come back
    descending; each eigenvector has its largest-magnitude entry positive.
    """
    B = np.asarray(B, dtype=np.float64)
    n = B.shape[0]
    if not 1 <= count <= n:
        raise DomainError(f"cannot extract {count} eigenpairs from a {n} x {n} matrix")
    p = min(n, count + guard)
    Q = np.eye(n, p)
    shift = 0.0
    residual = np.inf
    for it in range(1, max_iter + 1):
        BQ = B @ Q
        T = Q.T @ BQ
        w, S = np.linalg.eigh(0.5 * (T + T.T))
        order = np.argsort(-w, kind="stable")
        w, S = w[order], S[:, order]
        V, BV = Q @ S, BQ @ S
        scale = max(float(np.abs(w).max()), np.finfo(float).tiny)
        R = BV[:, :count] - V[:, :count] * w[:count]
        residual = float(np.linalg.norm(R, axis=0).max()) / scale
        # a full block makes the first Rayleigh-Ritz step exact
        if residual <= tol or p == n:
            return w[:count].copy(), _fix_signs(V[:, :count]), it
        if w[-1] < 0:
            shift = max(shift, -float(w[-1]))
        Q, _ = np.linalg.qr(BV + shift * V)
    raise ConvergenceError(
        f"subspace iteration did not converge in {max_iter} sweeps (residual {residual:.3e})",
        residual)


@dataclass(frozen=True, eq=False)
class EmbeddingResult:
    chart: Chart
    eigenvalues: np.ndarray
    geodesic_stress: float
    negative_eigenvalues: bool = False
    iterations: int = 0
    bridges: tuple = ()
    timings: dict = field(default_factory=dict)

    @property
    def points(self) -> np.ndarray:
        return self.chart.points


def _pairwise(Z: np.ndarray) -> np.ndarray:
    sq = np.zeros((Z.shape[0], Z.shape[0]))
    for c in range(Z.shape[1]):
        diff = Z[:, c, None] - Z[None, :, c]
        sq += diff * diff
    return np.sqrt(sq)


def geodesic_stress(D, Z) -> float:
    D = np.asarray(D, dtype=np.float64)
    denom = float(np.sum(D * D))
    if denom == 0.0:
        return 0.0
    return float(np.sqrt(np.sum((D - _pairwise(np.asarray(Z))) ** 2) / denom))


def classical_mds(geodesics, target_dim: int = 2, tol: float = EIG_TOL,
                  max_iter: int = EIG_MAX_ITER) -> EmbeddingResult:
    """Embed a distance matrix in ``target_dim`` dimensions by classical scaling.

    Coordinates are ``sqrt(max(lam, 0)) * v`` for the leading eigenpairs of the
    double-centered squared-distance matrix.  Negative leading eigenvalues
    are clipped to zero and reported through ``negative_eigenvalues``.
    """
    D = np.asarray(geodesics, dtype=np.float64)
    n = D.shape[0]
    if not 1 <= target_dim < n:
        raise DomainError(f"target_dim must satisfy 1 <= D' < N = {n}, got {target_dim}")
    B = double_center(D)
    w, V, iters = leading_eigenpairs(B, target_dim, tol, max_iter)
    negative = bool(np.any(w < 0))
    w = np.maximum(w, 0.0)
    Z = V * np.sqrt(w)
    return EmbeddingResult(Chart(Z), w, geodesic_stress(D, Z), negative, iters)


STAGES = ("distance", "graph", "geodesics", "mds")


def chart_channels(dataset, dim: int = 2, k: int = 30, connectivity: str = "bridge",
                   measure: str = "phase_insensitive", n_threads: int = 1,
                   timings: Optional[dict] = None) -> EmbeddingResult:
    """Distance matrix, k-NN graph, connectivity repair, geodesics, classical MDS.

    Returns one chart point per channel, in dataset order.  Stage failures are
    re-raised as StageError naming the stage.  Completed stage durations (s)
    are recorded into ``timings`` when a dict is passed.
    """
    timings = {} if timings is None else timings

    def run(stage, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except Exception as exc:
            raise StageError(stage, exc) from exc
        timings[stage] = timings.get(stage, 0.0) + time.perf_counter() - t0
        return out

    D = run("distance", build_distance_matrix, dataset, measure, n_threads)
    graph = run("graph", knn_graph, D, k)
    graph = run("graph", ensure_connected, graph, D, connectivity)
    G = run("geodesics", geodesic_distances, graph, n_threads)
    result = run("mds", classical_mds, G, dim)
    return EmbeddingResult(result.chart, result.eigenvalues, result.geodesic_stress,
                           result.negative_eigenvalues, result.iterations,
                           graph.bridges, dict(timings))
