"""Fallback kernels built on numpy and scipy, used when the compiled module is absent.

Same signatures and semantics as ``_ckernels``.  ``n_threads`` is accepted
and ignored: these paths are sequential from chartkit's point of view.
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

KIND_EUCLIDEAN = 0
KIND_PHASE_INSENSITIVE = 1
REFINE_BELOW = 1e-4


def pair_distances(X, kind, n_threads=1):
    H = np.ascontiguousarray(X).view(np.complex128)
    n = H.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    if kind == KIND_EUCLIDEAN:
        for i in range(n - 1):
            diff = H[i + 1:] - H[i]
            out[i, i + 1:] = np.sqrt(np.sum(diff.real ** 2 + diff.imag ** 2, axis=1))
    else:
        norms = np.sqrt(np.sum(H.real ** 2 + H.imag ** 2, axis=1))
        gram = H.conj() @ H.T
        sq = np.maximum(0.0, 2.0 - 2.0 * np.abs(gram) / np.outer(norms, norms))
        rows, cols = np.nonzero(np.triu(sq < REFINE_BELOW, 1) & (gram != 0))
        if rows.size:
            ip = gram[rows, cols]
            diff = (H[rows] / norms[rows, None]
                    - (np.conj(ip) / np.abs(ip))[:, None] * (H[cols] / norms[cols, None]))
            sq[rows, cols] = np.sum(diff.real ** 2 + diff.imag ** 2, axis=1)
        out = np.triu(np.sqrt(sq), 1)
    return out + out.T


def all_sources_dijkstra(indptr, indices, weights, n_threads=1):
    n = len(indptr) - 1
    graph = csr_matrix((np.asarray(weights), np.asarray(indices), np.asarray(indptr)), shape=(n, n))
    return dijkstra(graph, directed=True)
