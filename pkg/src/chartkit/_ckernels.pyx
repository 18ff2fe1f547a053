# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: pairwise channel distances and all-sources Dijkstra.

Parallel loops split work by row or by source node only; every output entry
is produced by one thread with a fixed operation order, so results do not
depend on the thread count.
"""

import numpy as np

from cython.parallel cimport parallel, prange
from libc.math cimport INFINITY, sqrt
from libc.stdlib cimport free, malloc

KIND_EUCLIDEAN = 0
KIND_PHASE_INSENSITIVE = 1
REFINE_BELOW = 1e-4


def pair_distances(const double[:, ::1] X, int kind, int n_threads=1):
    """Pairwise distances between rows of ``X``.

    ``X`` is the (N, 2M) float64 view of an (N, M) complex128 array.
    ``kind`` 0 gives ``||x_i - x_j||``; kind 1 gives the closed-form
    phase-insensitive distance ``sqrt(max(0, 2 - 2 |x_i^H x_j| / (|x_i| |x_j|)))``.
    Only i < j is computed; the lower triangle is a mirror.
    """
    cdef Py_ssize_t n = X.shape[0], m2 = X.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double acc, re, im, d, ar, ai, br, bi, c, mag, ur, ui, inv_i, inv_j, dr, di
    cdef double refine = REFINE_BELOW
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] D = out
    norms_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] norms = norms_arr

    if kind == 1:
        for i in prange(n, nogil=True, num_threads=n_threads, schedule="static"):
            acc = 0.0
            for t in range(m2):
                acc = acc + X[i, t] * X[i, t]
            norms[i] = sqrt(acc)

    for i in prange(n, nogil=True, num_threads=n_threads, schedule="dynamic"):
        for j in range(i + 1, n):
            if kind == 0:
                acc = 0.0
                for t in range(m2):
                    d = X[i, t] - X[j, t]
                    acc = acc + d * d
                d = sqrt(acc)
            else:
                re = 0.0
                im = 0.0
                for t in range(0, m2, 2):
                    ar = X[i, t]
                    ai = X[i, t + 1]
                    br = X[j, t]
                    bi = X[j, t + 1]
                    re = re + (ar * br + ai * bi)
                    im = im + (ar * bi - ai * br)
                mag = sqrt(re * re + im * im)
                c = mag / (norms[i] * norms[j])
                d = 2.0 - 2.0 * c
                if d < 0.0:
                    d = 0.0
                if d < refine and mag > 0.0:
                    # u = conj(ip) / |ip| aligns x_j with x_i
                    ur = re / mag
                    ui = -im / mag
                    inv_i = 1.0 / norms[i]
                    inv_j = 1.0 / norms[j]
                    acc = 0.0
                    for t in range(0, m2, 2):
                        br = X[j, t] * inv_j
                        bi = X[j, t + 1] * inv_j
                        dr = X[i, t] * inv_i - (ur * br - ui * bi)
                        di = X[i, t + 1] * inv_i - (ur * bi + ui * br)
                        acc = acc + (dr * dr + di * di)
                    d = acc
                d = sqrt(d)
            D[i, j] = d
            D[j, i] = d
    return out


cdef inline void _heap_push(double* keys, int* nodes, Py_ssize_t* size,
                            double key, int node) noexcept nogil:
    cdef Py_ssize_t pos = size[0], parent
    size[0] += 1
    while pos > 0:
        parent = (pos - 1) >> 1
        if keys[parent] <= key:
            break
        keys[pos] = keys[parent]
        nodes[pos] = nodes[parent]
        pos = parent
    keys[pos] = key
    nodes[pos] = node


cdef inline void _heap_pop(double* keys, int* nodes, Py_ssize_t* size) noexcept nogil:
    """Drop the root; read ``keys[0]``/``nodes[0]`` before calling."""
    cdef Py_ssize_t n, pos = 0, child
    cdef double last_key
    cdef int last_node
    size[0] -= 1
    n = size[0]
    if n == 0:
        return
    last_key = keys[n]
    last_node = nodes[n]
    while True:
        child = 2 * pos + 1
        if child >= n:
            break
        if child + 1 < n and keys[child + 1] < keys[child]:
            child += 1
        if last_key <= keys[child]:
            break
        keys[pos] = keys[child]
        nodes[pos] = nodes[child]
        pos = child
    keys[pos] = last_key
    nodes[pos] = last_node


def all_sources_dijkstra(const long long[::1] indptr, const int[::1] indices,
                         const double[::1] weights, int n_threads=1):
    """Shortest-path lengths from every node of a CSR graph with nonnegative weights.

    Unreachable pairs are left at ``inf``.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t cap = weights.shape[0] + n + 1
    cdef Py_ssize_t s, size, e, v
    cdef double key, nd
    cdef int u
    cdef double* keys
    cdef int* nodes
    cdef char* done
    out = np.full((n, n), np.inf, dtype=np.float64)
    cdef double[:, ::1] D = out

    with nogil, parallel(num_threads=n_threads):
        keys = <double*> malloc(cap * sizeof(double))
        nodes = <int*> malloc(cap * sizeof(int))
        done = <char*> malloc((n + 1) * sizeof(char))
        for s in prange(n, schedule="dynamic"):
            for v in range(n):
                done[v] = 0
            D[s, s] = 0.0
            size = 0
            _heap_push(keys, nodes, &size, 0.0, <int> s)
            while size > 0:
                # assigned here, not through pointers, so OpenMP keeps them thread-private
                key = keys[0]
                u = nodes[0]
                _heap_pop(keys, nodes, &size)
                if done[u]:
                    continue
                done[u] = 1
                for e in range(indptr[u], indptr[u + 1]):
                    v = indices[e]
                    nd = key + weights[e]
                    if nd < D[s, v]:
                        D[s, v] = nd
                        _heap_push(keys, nodes, &size, nd, <int> v)
        free(keys)
        free(nodes)
        free(done)
    return out
