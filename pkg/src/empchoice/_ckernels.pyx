# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled resampling kernels (see ``_pykernels`` for the reference versions)."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cnp.import_array()

cdef double EPS = 1e-12


def threshold_batch(ranks, Py_ssize_t n_ranks, index, Py_ssize_t zu, double su, double sv):
    cdef cnp.int64_t[::1] rk = np.ascontiguousarray(ranks, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] idx = np.ascontiguousarray(index, dtype=np.int64)
    cdef Py_ssize_t B = idx.shape[0], L = idx.shape[1]
    a_arr = np.zeros(B, dtype=np.int64)
    b_arr = np.zeros(B, dtype=np.int64)
    t_arr = np.zeros(B, dtype=np.int64)
    cdef cnp.int64_t[::1] a_out = a_arr, b_out = b_arr, t_out = t_arr
    cdef cnp.int64_t* cu = <cnp.int64_t*> malloc((n_ranks + 1) * sizeof(cnp.int64_t))
    cdef cnp.int64_t* cv = <cnp.int64_t*> malloc((n_ranks + 1) * sizeof(cnp.int64_t))
    cdef Py_ssize_t r, k, t, best_t
    cdef cnp.int64_t A, Bc, best_a, best_b
    cdef double val, best
    if cu == NULL or cv == NULL:
        free(cu)
        free(cv)
        raise MemoryError()
    with nogil:
        for r in range(B):
            memset(cu, 0, (n_ranks + 1) * sizeof(cnp.int64_t))
            memset(cv, 0, (n_ranks + 1) * sizeof(cnp.int64_t))
            for k in range(zu):
                cu[rk[idx[r, k]]] += 1
            for k in range(zu, L):
                cv[rk[idx[r, k]]] += 1
            # empty set first so that it wins exact ties
            best = 0.0
            best_t = n_ranks
            best_a = 0
            best_b = 0
            A = 0
            Bc = 0
            t = n_ranks - 1
            while t >= 0:
                A += cu[t]
                Bc += cv[t]
                val = su * A - sv * Bc
                if val < best:
                    best = val
                    best_t = t
                    best_a = A
                    best_b = Bc
                t -= 1
            a_out[r] = best_a
            b_out[r] = best_b
            t_out[r] = best_t
    free(cu)
    free(cv)
    return a_arr, b_arr, t_arr


cdef struct Graph:
    int n
    int m
    int* head
    int* nxt
    int* to
    double* cap
    int* level
    int* it
    int* queue


cdef inline void add_edge(Graph* g, int x, int y, double c) noexcept nogil:
    g.to[g.m] = y
    g.cap[g.m] = c
    g.nxt[g.m] = g.head[x]
    g.head[x] = g.m
    g.m += 1
    g.to[g.m] = x
    g.cap[g.m] = 0.0
    g.nxt[g.m] = g.head[y]
    g.head[y] = g.m
    g.m += 1


cdef bint bfs(Graph* g, int s, int t) noexcept nogil:
    cdef int qh = 0, qt = 0, x, e, y
    for x in range(g.n):
        g.level[x] = -1
    g.level[s] = 0
    g.queue[qt] = s
    qt += 1
    while qh < qt:
        x = g.queue[qh]
        qh += 1
        e = g.head[x]
        while e >= 0:
            y = g.to[e]
            if g.cap[e] > EPS and g.level[y] < 0:
                g.level[y] = g.level[x] + 1
                g.queue[qt] = y
                qt += 1
            e = g.nxt[e]
    return g.level[t] >= 0


cdef double dfs(Graph* g, int x, int t, double pushed) noexcept nogil:
    cdef int e, y
    cdef double d, c
    if x == t:
        return pushed
    while g.it[x] >= 0:
        e = g.it[x]
        y = g.to[e]
        if g.cap[e] > EPS and g.level[y] == g.level[x] + 1:
            c = pushed if pushed < g.cap[e] else g.cap[e]
            d = dfs(g, y, t, c)
            if d > EPS:
                g.cap[e] -= d
                g.cap[e ^ 1] += d
                return d
        g.it[x] = g.nxt[e]
    return 0.0


def closure_batch(node_of, Py_ssize_t n_nodes, edges, index, Py_ssize_t zu, double su, double sv):
    cdef cnp.int64_t[::1] nof = np.ascontiguousarray(node_of, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] ed = np.ascontiguousarray(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
    cdef cnp.int64_t[:, ::1] idx = np.ascontiguousarray(index, dtype=np.int64)
    cdef Py_ssize_t B = idx.shape[0], L = idx.shape[1], E = ed.shape[0]
    a_arr = np.zeros(B, dtype=np.int64)
    b_arr = np.zeros(B, dtype=np.int64)
    mem_arr = np.zeros((B, n_nodes), dtype=np.uint8)
    cdef cnp.int64_t[::1] a_out = a_arr, b_out = b_arr
    cdef cnp.uint8_t[:, ::1] members = mem_arr
    cdef int n = <int> n_nodes + 2
    cdef int s = <int> n_nodes, t = <int> n_nodes + 1
    cdef int max_edges = 2 * (<int> n_nodes + <int> E)
    cdef Graph g
    cdef cnp.int64_t* cu = <cnp.int64_t*> malloc(n_nodes * sizeof(cnp.int64_t))
    cdef cnp.int64_t* cv = <cnp.int64_t*> malloc(n_nodes * sizeof(cnp.int64_t))
    cdef double* w = <double*> malloc(n_nodes * sizeof(double))
    g.n = n
    g.head = <int*> malloc(n * sizeof(int))
    g.level = <int*> malloc(n * sizeof(int))
    g.it = <int*> malloc(n * sizeof(int))
    g.queue = <int*> malloc(n * sizeof(int))
    g.nxt = <int*> malloc(max_edges * sizeof(int))
    g.to = <int*> malloc(max_edges * sizeof(int))
    g.cap = <double*> malloc(max_edges * sizeof(double))
    cdef Py_ssize_t r, k, x
    cdef double big, f
    cdef cnp.int64_t A, Bc
    cdef int e, y, qh, qt
    if (cu == NULL or cv == NULL or w == NULL or g.head == NULL or g.level == NULL
            or g.it == NULL or g.queue == NULL or g.nxt == NULL or g.to == NULL or g.cap == NULL):
        free(cu); free(cv); free(w); free(g.head); free(g.level); free(g.it)
        free(g.queue); free(g.nxt); free(g.to); free(g.cap)
        raise MemoryError()
    with nogil:
        for r in range(B):
            for x in range(n_nodes):
                cu[x] = 0
                cv[x] = 0
            for k in range(zu):
                cu[nof[idx[r, k]]] += 1
            for k in range(zu, L):
                cv[nof[idx[r, k]]] += 1
            big = 1.0
            for x in range(n_nodes):
                w[x] = sv * cv[x] - su * cu[x]
                big += w[x] if w[x] > 0 else -w[x]
            g.m = 0
            for x in range(n):
                g.head[x] = -1
            for x in range(n_nodes):
                if w[x] > 0:
                    add_edge(&g, s, <int> x, w[x])
                elif w[x] < 0:
                    add_edge(&g, <int> x, t, -w[x])
            for k in range(E):
                add_edge(&g, <int> ed[k, 0], <int> ed[k, 1], big)
            while bfs(&g, s, t):
                for x in range(n):
                    g.it[x] = g.head[x]
                while True:
                    f = dfs(&g, s, t, 1e300)
                    if f <= EPS:
                        break
            # source side of the residual graph is the optimal closure
            for x in range(n):
                g.level[x] = -1
            g.level[s] = 0
            qh = 0
            qt = 0
            g.queue[qt] = s
            qt += 1
            while qh < qt:
                x = g.queue[qh]
                qh += 1
                e = g.head[x]
                while e >= 0:
                    y = g.to[e]
                    if g.cap[e] > EPS and g.level[y] < 0:
                        g.level[y] = 0
                        g.queue[qt] = y
                        qt += 1
                    e = g.nxt[e]
            A = 0
            Bc = 0
            for x in range(n_nodes):
                if g.level[x] == 0:
                    members[r, x] = 1
                    A += cu[x]
                    Bc += cv[x]
            a_out[r] = A
            b_out[r] = Bc
    free(cu); free(cv); free(w); free(g.head); free(g.level); free(g.it)
    free(g.queue); free(g.nxt); free(g.to); free(g.cap)
    return a_arr, b_arr, mem_arr
