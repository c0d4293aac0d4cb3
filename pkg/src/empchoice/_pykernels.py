"""Pure-Python/numpy versions of the resampling kernels.

Used when the compiled extension is unavailable (or forced through the
``EMPCHOICE_PURE_PYTHON`` environment variable).  Signatures and results
match :mod:`empchoice._ckernels` exactly.

Both kernels receive an index matrix of shape ``(B, zu + zv)``: row ``r``
lists pooled observations, the first ``zu`` forming the ``u`` group and the
rest the ``v`` group.  They minimise ``su * A(U) - sv * B(U)`` over upper sets
``U`` (including the empty set), where ``A``/``B`` count ``u``/``v``
observations in ``U``, and return the counts at the minimiser.
"""

from __future__ import annotations

from collections import deque

import numpy as np

EPS = 1e-12


def threshold_batch(ranks, n_ranks, index, zu, su, sv):
    """Chain case: upper sets are ``{rank >= t}``.

    Returns ``(a, b, t)`` where ``t == n_ranks`` encodes the empty set.
    """
    ranks = np.asarray(ranks, dtype=np.int64)
    index = np.asarray(index, dtype=np.int64)
    B = index.shape[0]
    r = ranks[index]
    cu = np.zeros((B, n_ranks + 1), dtype=np.int64)
    cv = np.zeros((B, n_ranks + 1), dtype=np.int64)
    rows = np.arange(B)[:, None]
    np.add.at(cu, (rows, r[:, :zu]), 1)
    np.add.at(cv, (rows, r[:, zu:]), 1)
    # suffix counts; column n_ranks stays zero (empty set)
    A = np.cumsum(cu[:, ::-1], axis=1)[:, ::-1]
    Bc = np.cumsum(cv[:, ::-1], axis=1)[:, ::-1]
    vals = su * A - sv * Bc
    # prefer the empty set (last column) on exact ties, then the highest threshold
    t = n_ranks - np.argmin(vals[:, ::-1], axis=1)
    a = A[np.arange(B), t]
    b = Bc[np.arange(B), t]
    return a, b, t


class _Dinic:
    def __init__(self, n):
        self.n = n
        self.adj = [[] for _ in range(n)]
        self.to = []
        self.cap = []

    def add_edge(self, x, y, c):
        self.adj[x].append(len(self.to))
        self.to.append(y)
        self.cap.append(c)
        self.adj[y].append(len(self.to))
        self.to.append(x)
        self.cap.append(0.0)

    def maxflow(self, s, t):
        to, cap, adj = self.to, self.cap, self.adj
        flow = 0.0
        while True:
            level = [-1] * self.n
            level[s] = 0
            q = deque([s])
            while q:
                x = q.popleft()
                for e in adj[x]:
                    if cap[e] > EPS and level[to[e]] < 0:
                        level[to[e]] = level[x] + 1
                        q.append(to[e])
            if level[t] < 0:
                return flow
            it = [0] * self.n

            def dfs(x, pushed):
                if x == t:
                    return pushed
                while it[x] < len(adj[x]):
                    e = adj[x][it[x]]
                    y = to[e]
                    if cap[e] > EPS and level[y] == level[x] + 1:
                        d = dfs(y, min(pushed, cap[e]))
                        if d > EPS:
                            cap[e] -= d
                            cap[e ^ 1] += d
                            return d
                    it[x] += 1
                return 0.0

            while True:
                f = dfs(s, float("inf"))
                if f <= EPS:
                    break
                flow += f

    def source_side(self, s):
        seen = [False] * self.n
        seen[s] = True
        q = deque([s])
        while q:
            x = q.popleft()
            for e in self.adj[x]:
                if self.cap[e] > EPS and not seen[self.to[e]]:
                    seen[self.to[e]] = True
                    q.append(self.to[e])
        return seen


def closure_batch(node_of, n_nodes, edges, index, zu, su, sv):
    """General order: max-weight closure with node weight
    ``sv * cnt_v - su * cnt_u`` solved by min-cut.

    Returns ``(a, b, members)`` with ``members`` a ``(B, n_nodes)`` uint8
    matrix marking the minimising upper set.
    """
    node_of = np.asarray(node_of, dtype=np.int64)
    index = np.asarray(index, dtype=np.int64)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    B = index.shape[0]
    a_out = np.zeros(B, dtype=np.int64)
    b_out = np.zeros(B, dtype=np.int64)
    members = np.zeros((B, n_nodes), dtype=np.uint8)
    s, t = n_nodes, n_nodes + 1
    for r in range(B):
        nodes = node_of[index[r]]
        cu = np.bincount(nodes[:zu], minlength=n_nodes)
        cv = np.bincount(nodes[zu:], minlength=n_nodes)
        w = sv * cv - su * cu
        big = float(np.sum(np.abs(w))) + 1.0
        g = _Dinic(n_nodes + 2)
        for x in range(n_nodes):
            if w[x] > 0:
                g.add_edge(s, x, float(w[x]))
            elif w[x] < 0:
                g.add_edge(x, t, float(-w[x]))
        for x, y in edges:
            g.add_edge(int(x), int(y), big)
        g.maxflow(s, t)
        side = g.source_side(s)
        m = np.array(side[:n_nodes], dtype=bool)
        members[r] = m
        a_out[r] = int(cu[m].sum())
        b_out[r] = int(cv[m].sum())
    return a_out, b_out, members
