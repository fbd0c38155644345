"""Disjoint-set forest with path compression and union by size.

:class:`UnionFind` is the readable reference (full path compression); the
``uf_*`` functions are the numba versions used in the percolation inner loop
and compress by path halving.
"""

from __future__ import annotations

import numpy as np
from numba import njit


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; return True if they were distinct."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def labels(self) -> list[int]:
        return [self.find(x) for x in range(len(self.parent))]


@njit(cache=True, nogil=True, inline="always")
def uf_find(parent, x):
    # path halving: every visited node skips to its grandparent
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True, inline="always")
def uf_union(parent, size, a, b):
    ra = uf_find(parent, a)
    rb = uf_find(parent, b)
    if ra == rb:
        return False
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return True


@njit(cache=True, nogil=True)
def spans(n_nodes, a, b, is_open, source, sink):
    """True when open edges join some source node to some sink node.

    Two virtual nodes tie the source and sink sides together.
    """
    parent = np.arange(n_nodes + 2)
    size = np.ones(n_nodes + 2, dtype=np.int64)
    s_node = n_nodes
    t_node = n_nodes + 1
    for k in range(source.shape[0]):
        uf_union(parent, size, s_node, source[k])
    for k in range(sink.shape[0]):
        uf_union(parent, size, t_node, sink[k])
    for e in range(a.shape[0]):
        if is_open[e]:
            # union by size, written out: the call form is twice as slow here
            ra = uf_find(parent, a[e])
            rb = uf_find(parent, b[e])
            if ra != rb:
                if size[ra] < size[rb]:
                    ra, rb = rb, ra
                parent[rb] = ra
                size[ra] += size[rb]
    return uf_find(parent, s_node) == uf_find(parent, t_node)


@njit(cache=True, nogil=True)
def component_labels(n_nodes, a, b, is_open):
    """Smallest node index of each node's open cluster."""
    parent = np.arange(n_nodes)
    size = np.ones(n_nodes, dtype=np.int64)
    for e in range(a.shape[0]):
        if is_open[e]:
            ra = uf_find(parent, a[e])
            rb = uf_find(parent, b[e])
            if ra != rb:
                if size[ra] < size[rb]:
                    ra, rb = rb, ra
                parent[rb] = ra
                size[ra] += size[rb]
    label = np.empty(n_nodes, dtype=np.int64)
    low = np.full(n_nodes, n_nodes, dtype=np.int64)
    for v in range(n_nodes):
        r = uf_find(parent, v)
        if v < low[r]:
            low[r] = v
    for v in range(n_nodes):
        label[v] = low[uf_find(parent, v)]
    return label
