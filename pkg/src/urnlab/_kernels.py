"""Compiled tree-growth and census kernels.

All randomness comes in as pre-drawn uniforms so results depend only on the
caller's generator.  Trees are stored as flat arrays in which every child has
a larger index than its parent, so a single reverse sweep visits nodes
bottom-up.
"""

from __future__ import annotations

import numpy as np
from numba import njit

OVER = -1


@njit(cache=True)
def grow_mst(m, n, u):
    """Grow an m-ary search tree with ``n`` keys.

    Returns ``(keys, first_child)``; the children of a full node ``v`` are
    ``first_child[v] + j`` for ``j < m``.
    """
    max_nodes = 1 + m * (n // (m - 1) + 1)
    keys = np.zeros(max_nodes, dtype=np.int64)
    first_child = np.full(max_nodes, -1, dtype=np.int64)
    gap_owner = np.zeros(n + 1, dtype=np.int64)
    # positions in gap_owner of the gaps owned by each non-full node
    gap_pos = np.zeros((max_nodes, max(m - 1, 1)), dtype=np.int64)
    n_nodes = 1
    for t in range(n):
        g = int(u[t] * (t + 1))
        if g > t:
            g = t
        v = gap_owner[g]
        k = keys[v] + 1
        keys[v] = k
        if k < m - 1:
            gap_owner[t + 1] = v
            gap_pos[v, k] = t + 1
        else:
            c0 = n_nodes
            n_nodes += m
            first_child[v] = c0
            for j in range(m - 1):
                p = gap_pos[v, j]
                gap_owner[p] = c0 + j
                gap_pos[c0 + j, 0] = p
            gap_owner[t + 1] = c0 + m - 1
            gap_pos[c0 + m - 1, 0] = t + 1
    return keys[:n_nodes].copy(), first_child[:n_nodes].copy()


@njit(cache=True)
def _lookup(codes, ids, code):
    i = np.searchsorted(codes, code)
    if i < codes.shape[0] and codes[i] == code:
        return ids[i]
    return OVER


@njit(cache=True)
def census_mst(m, keys, first_child, leaf_ids, codes, ids, n_shapes, unordered):
    """Fringe counts, protected nodes, degree histogram and single-node census.

    Parameters
    ----------
    leaf_ids : int64 array
        Shape id of a childless node with ``i`` keys, or OVER.
    codes, ids : int64 arrays
        Sorted codes of full shapes (base ``n_shapes + 1`` digits of child
        ids) and the matching shape ids.

    Returns
    -------
    counts : per-shape fringe counts
    protected : number of protected nodes
    degrees : histogram of key-holding children over key-holding nodes
    singles : number of childless nodes with ``i`` keys, ``i < m - 1``
    """
    n_nodes = keys.shape[0]
    shape = np.empty(n_nodes, dtype=np.int64)
    is_leaf = np.zeros(n_nodes, dtype=np.bool_)
    counts = np.zeros(n_shapes, dtype=np.int64)
    degrees = np.zeros(m + 1, dtype=np.int64)
    singles = np.zeros(max(m - 1, 1), dtype=np.int64)
    kid = np.empty(m, dtype=np.int64)
    base = n_shapes + 1
    protected = 0
    for v in range(n_nodes - 1, -1, -1):
        fc = first_child[v]
        if fc < 0:
            s = leaf_ids[keys[v]]
            singles[keys[v]] += 1
            is_leaf[v] = keys[v] > 0
            if keys[v] > 0:
                degrees[0] += 1
        else:
            over = False
            internal = 0
            kid_leaf = False
            for j in range(m):
                c = fc + j
                kid[j] = shape[c]
                if kid[j] == OVER:
                    over = True
                if keys[c] > 0:
                    internal += 1
                    if is_leaf[c]:
                        kid_leaf = True
            degrees[internal] += 1
            is_leaf[v] = internal == 0
            if internal > 0 and not kid_leaf:
                protected += 1
            if over:
                s = OVER
            else:
                if unordered:
                    kid.sort()
                code = 0
                for j in range(m):
                    code = code * base + kid[j] + 1
                s = _lookup(codes, ids, code)
        shape[v] = s
        if s != OVER:
            counts[s] += 1
    return counts, protected, degrees, singles


@njit(cache=True)
def _fenwick_add(tree, i, delta):
    n = tree.shape[0]
    i += 1
    while i <= n:
        tree[i - 1] += delta
        i += i & (-i)


@njit(cache=True)
def _fenwick_find(tree, r):
    # smallest index whose prefix sum exceeds r
    n = tree.shape[0]
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt - 1] <= r:
            pos = nxt
            r -= tree[nxt - 1]
        step //= 2
    return pos


@njit(cache=True)
def grow_pa(n, chi, rho, u):
    """Grow a preferential attachment tree with ``n`` nodes.

    A node with ``d`` children is chosen with probability proportional to
    ``chi * d + rho``.  Returns the parent array (``parent[0] = -1``).
    """
    parent = np.full(n, -1, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    tree = np.zeros(n, dtype=np.float64)
    wsum = 0.0
    _fenwick_add(tree, 0, rho)
    wsum = rho
    for t in range(1, n):
        # exact total weight, avoiding drift in the running sum
        wsum = t * (chi + rho) - chi
        r = u[t] * wsum
        v = _fenwick_find(tree, r)
        if v >= t:
            v = t - 1
            while chi * deg[v] + rho <= 0.0:
                v -= 1
        parent[t] = v
        deg[v] += 1
        _fenwick_add(tree, v, chi)
        _fenwick_add(tree, t, rho)
    return parent


@njit(cache=True)
def census_pa(parent, kmax_children, codes, ids, n_shapes, leaf_id, unordered, max_deg):
    """Fringe counts and degree census of a tree given by its parent array.

    Shape codes use base ``n_shapes + 1`` digits of ``child id + 1``; nodes with
    more than ``kmax_children`` children are never a target shape.
    """
    n = parent.shape[0]
    nchild = np.zeros(n, dtype=np.int64)
    for t in range(1, n):
        nchild[parent[t]] += 1
    start = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        start[v + 1] = start[v] + nchild[v]
    fill = start[:n].copy()
    kids = np.empty(max(n - 1, 1), dtype=np.int64)
    for t in range(1, n):
        p = parent[t]
        kids[fill[p]] = t
        fill[p] += 1
    shape = np.empty(n, dtype=np.int64)
    counts = np.zeros(n_shapes, dtype=np.int64)
    degrees = np.zeros(max_deg + 2, dtype=np.int64)
    buf = np.empty(max(kmax_children, 1), dtype=np.int64)
    base = n_shapes + 1
    for v in range(n - 1, -1, -1):
        d = nchild[v]
        if d <= max_deg:
            degrees[d] += 1
        else:
            degrees[max_deg + 1] += 1
        if d == 0:
            s = leaf_id
        elif d > kmax_children:
            s = OVER
        else:
            over = False
            for j in range(d):
                buf[j] = shape[kids[start[v] + j]]
                if buf[j] == OVER:
                    over = True
            if over:
                s = OVER
            else:
                if unordered:
                    buf[:d].sort()
                code = 0
                for j in range(d):
                    code = code * base + buf[j] + 1
                s = _lookup(codes, ids, code)
        shape[v] = s
        if s != OVER:
            counts[s] += 1
    return counts, degrees


def as_uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.random(size)
